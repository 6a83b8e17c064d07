// Copyright 2026 The scvx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "scvx/conic.hpp"

// Helpers shared by the conic backends.
namespace scvx::detail {

struct StackedData {
  Eigen::SparseMatrix<double> G;  // rows: all blocks, in order
  Eigen::VectorXd h;
  std::vector<int> block_start;
};

StackedData stack_blocks(const ConicProgram& program);

void project_soc_inplace(Eigen::Ref<Eigen::VectorXd> v);
void project_cone_inplace(Eigen::Ref<Eigen::VectorXd> v, ConeKind kind, bool dual);
void check_block_size(const Eigen::VectorXd& block, const Cone& cone);
void project_stacked(Eigen::VectorXd& v, const ConicProgram& program,
                     const std::vector<int>& starts, bool dual);

Residuals compute_residuals(const ConicProgram& program, const StackedData& data,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& y);

std::vector<Eigen::VectorXd> split_dual(const ConicProgram& program,
                                        const std::vector<int>& starts,
                                        const Eigen::VectorXd& y);

}  // namespace scvx::detail
