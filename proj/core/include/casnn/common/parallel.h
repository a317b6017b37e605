/*
 * Copyright 2026 The CasNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CASNN_COMMON_PARALLEL_H_
#define CASNN_COMMON_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace casnn {

// Runs fn(i) for i in [0, n) on up to `threads` worker threads. Indices are
// handed out in contiguous blocks; with threads <= 1 the loop runs inline in
// index order. Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

// --threads value if positive, otherwise CAS_PIPELINE_THREADS, otherwise 1.
std::size_t resolve_thread_count(int requested);

// Pins the BLAS backend to a single thread; our own workers provide the
// parallelism and a single-threaded GEMM keeps results order-independent.
void configure_blas_single_threaded();

}  // namespace casnn

#endif  // CASNN_COMMON_PARALLEL_H_
