// Copyright 2026 The faas-host Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

namespace snafu {

class ModuleCatalog;

// Built-in sample modules:
//   hello:   helloworld()           -> "Hello, World!"
//   fib:     fib(n), fib_delay(n)   recursive Fibonacci through the host,
//                                   with a module-global call counter
//   counter: counter()              -> number of calls seen by this instance
//   util:    echo(event), fail(message), sleep(ms)
void register_sample_modules(ModuleCatalog& catalog);

// Per-call artificial wait of fib_delay.
inline constexpr int kFibDelayMillis = 100;

// Number of invocations a top-level fib(n) performs: 2*F(n) - 1 with
// F(1) = F(2) = 1. Throws std::invalid_argument for n < 1.
std::int64_t fib_call_count(std::int64_t n);

}  // namespace snafu
