// tools/cli.hpp

// Copyright 2026  The diadet Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef DIADET_TOOLS_CLI_HPP_
#define DIADET_TOOLS_CLI_HPP_

#include "diadet/error.hpp"

namespace diadet {
namespace cli {

enum ExitStatus {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

ExitStatus ExitStatusFor(ErrorCode code);

// Entry point of the diadet tool; never throws.
int Run(int argc, char **argv);

}  // namespace cli
}  // namespace diadet

#endif  // DIADET_TOOLS_CLI_HPP_
