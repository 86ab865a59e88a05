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

// The thirteen Allen relations as independent endpoint predicates, indexed
// in the order: before, meets, overlaps, starts, during, finishes, equals,
// finished_by, contains, started_by, overlapped_by, met_by, after.

#include <array>
#include <cstdint>
#include <string_view>

namespace oracle {

struct Span {
    std::int64_t s, e;
};

inline std::array<bool, 13> allen_holds(Span a, Span b) {
    return {
        a.e < b.s,                          // before
        a.e == b.s,                         // meets
        a.s < b.s && b.s < a.e && a.e < b.e,  // overlaps
        a.s == b.s && a.e < b.e,            // starts
        b.s < a.s && a.e < b.e,             // during
        b.s < a.s && a.e == b.e,            // finishes
        a.s == b.s && a.e == b.e,           // equals
        a.s < b.s && a.e == b.e,            // finished_by
        a.s < b.s && b.e < a.e,             // contains
        a.s == b.s && b.e < a.e,            // started_by
        b.s < a.s && a.s < b.e && b.e < a.e,  // overlapped_by
        a.s == b.e,                         // met_by
        b.e < a.s,                          // after
    };
}

inline constexpr std::array<std::string_view, 13> kAllenNames{
    "before", "meets", "overlaps", "starts", "during", "finishes", "equals",
    "finished_by", "contains", "started_by", "overlapped_by", "met_by", "after"};

}  // namespace oracle
