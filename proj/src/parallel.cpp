// Copyright 2026 The nashvi Authors
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

#include "nashvi/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace nashvi::parallel {

namespace {
std::atomic<int> g_thread_cap{0};
}

void set_thread_cap(int threads) { g_thread_cap.store(threads > 0 ? threads : 0); }

int thread_cap() { return g_thread_cap.load(); }

int effective_threads() {
#if defined(_OPENMP)
  const int cap = thread_cap();
  const int available = omp_get_max_threads();
  return cap > 0 ? cap : available;
#else
  return 1;
#endif
}

void apply_env_thread_cap() {
  const char* value = std::getenv("NASHVI_THREADS");
  if (value == nullptr) return;
  try {
    const int threads = std::stoi(value);
    if (threads > 0) set_thread_cap(threads);
  } catch (const std::exception&) {
    // Unparseable values leave the default in place.
  }
}

}  // namespace nashvi::parallel
