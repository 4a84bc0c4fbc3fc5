// Copyright 2026 The CFSA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cfsa/error.h"

namespace cfsa {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kEmptyDataset: return "empty-dataset";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kDegenerateTraining: return "degenerate-training";
    case ErrorKind::kDegenerateFold: return "degenerate-fold";
    case ErrorKind::kInfeasibleRebalance: return "infeasible-rebalance";
    case ErrorKind::kSynthesisInfeasible: return "synthesis-infeasible";
    case ErrorKind::kUndefinedMetric: return "undefined-metric";
    case ErrorKind::kSelection: return "selection";
    case ErrorKind::kClassification: return "classification";
    case ErrorKind::kGeneration: return "generation";
  }
  return "unknown";
}

}  // namespace cfsa
