/*
 Copyright 2026 The Multilift Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef MULTILIFT_PARALLEL_HPP
#define MULTILIFT_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace multilift {

/**
 * @brief Runs fn(0..count-1) on up to `workers` threads with a static partition.
 *
 * Each index writes only its own outputs, so results do not depend on the
 * worker count. The exception of the lowest failing index is rethrown.
 */
inline void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    workers = std::clamp(workers, 1, count);
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run(0, count);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            int begin = count * w / workers;
            int end = count * (w + 1) / workers;
            pool.emplace_back(run, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace multilift

#endif  // MULTILIFT_PARALLEL_HPP
