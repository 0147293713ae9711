/*
 * Copyright 2026 The Wirefield Authors.
 *
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

#pragma once

#include <cstddef>
#include <vector>

namespace wirefield {

/// Dense row-major rows x cols grid.
template <typename T>
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<T> v;

    Grid() = default;
    Grid(int r, int c, T fill = T{}) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

    T& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    bool inside(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }
    size_t size() const { return v.size(); }
};

/// Channel-major stack of grids (channels x rows x cols of double).
struct MultiGrid {
    int channels = 0;
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    MultiGrid() = default;
    MultiGrid(int ch, int r, int c, double fill = 0.0)
        : channels(ch), rows(r), cols(c), v(static_cast<size_t>(ch) * r * c, fill) {}

    double& at(int ch, int r, int c) {
        return v[(static_cast<size_t>(ch) * rows + r) * cols + c];
    }
    double at(int ch, int r, int c) const {
        return v[(static_cast<size_t>(ch) * rows + r) * cols + c];
    }

    size_t size() const { return v.size(); }
};

}  // namespace wirefield
