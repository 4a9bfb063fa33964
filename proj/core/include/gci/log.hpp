/*
Copyright 2026 The gcinet Authors. All rights reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef GCI_LOG_HPP_
#define GCI_LOG_HPP_

#include <string_view>

namespace gci::log {

enum class Level { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kQuiet = 4 };

// Messages below the threshold are dropped.  Default: kInfo.
void set_level(Level level);
Level level();

void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);
void debug(std::string_view msg);

}  // namespace gci::log

#endif  // GCI_LOG_HPP_
