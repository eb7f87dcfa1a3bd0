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

#pragma once

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace nashvi::parallel {

/// Upper bound on worker threads for the parallel kernels; 0 means the
/// OpenMP default.
void set_thread_cap(int threads);
int thread_cap();

/// Threads the next parallel region will use.
int effective_threads();

/// Reads NASHVI_THREADS and applies it as the cap when set and positive.
void apply_env_thread_cap();

}  // namespace nashvi::parallel
