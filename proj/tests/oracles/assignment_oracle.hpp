/*
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

#pragma once

// Exhaustive assignment between two small box sets maximising total IoU
// over pairs at or above a threshold.

#include <algorithm>
#include <numeric>
#include <vector>

#include "mmcep/spatial.hpp"

namespace oracle {

// result[i] is the index in `next` matched to prev[i], or -1.
inline std::vector<int> best_assignment(const std::vector<mmcep::spatial::Rect>& prev,
                                        const std::vector<mmcep::spatial::Rect>& next, double threshold) {
    std::vector<int> perm(std::max(prev.size(), next.size()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1;
    std::vector<int> result(prev.size(), -1);
    do {
        double total = 0;
        std::vector<int> cur(prev.size(), -1);
        for (std::size_t i = 0; i < prev.size(); ++i) {
            const int j = perm[i];
            if (j >= static_cast<int>(next.size())) continue;
            const double v = mmcep::spatial::iou(prev[i], next[static_cast<std::size_t>(j)]);
            if (v >= threshold) {
                total += v;
                cur[i] = j;
            }
        }
        if (total > best) {
            best = total;
            result = cur;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return result;
}

}  // namespace oracle
