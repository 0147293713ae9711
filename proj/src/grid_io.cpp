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

#include "wirefield/grid_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "wirefield/errors.hpp"

namespace wirefield {

namespace {

constexpr char kMagic[8] = {'W', 'F', 'G', 'R', 'I', 'D', '1', '\0'};

void put_u32(std::ostream& os, uint32_t x) {
    unsigned char b[4] = {static_cast<unsigned char>(x & 0xff),
                          static_cast<unsigned char>((x >> 8) & 0xff),
                          static_cast<unsigned char>((x >> 16) & 0xff),
                          static_cast<unsigned char>((x >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_grid_file(const std::string& path, const GridSpec& spec, const MultiGrid& grid) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    os.write(kMagic, 8);
    put_u32(os, static_cast<uint32_t>(grid.channels));
    put_u32(os, static_cast<uint32_t>(grid.rows));
    put_u32(os, static_cast<uint32_t>(grid.cols));
    put_u32(os, static_cast<uint32_t>(spec.image_w));
    put_u32(os, static_cast<uint32_t>(spec.image_h));
    put_u32(os, static_cast<uint32_t>(spec.downsample));
    std::vector<float> payload(grid.v.size());
    for (size_t i = 0; i < grid.v.size(); ++i) payload[i] = static_cast<float>(grid.v[i]);
    static_assert(sizeof(float) == 4);
    os.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size() * 4));
    if (!os) throw DataError("write failed: " + path);
}

MultiGrid read_grid_file(const std::string& path, GridSpec* spec_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) {
        throw DataError("not a grid container: " + path);
    }
    const uint32_t channels = get_u32(is);
    const uint32_t rows = get_u32(is);
    const uint32_t cols = get_u32(is);
    GridSpec spec;
    spec.image_w = static_cast<int>(get_u32(is));
    spec.image_h = static_cast<int>(get_u32(is));
    spec.downsample = static_cast<int>(get_u32(is));
    if (!is) throw DataError("truncated header: " + path);

    const size_t count = static_cast<size_t>(channels) * rows * cols;
    if (count > (1u << 30)) throw DataError("grid header implausibly large: " + path);
    std::vector<float> payload(count);
    is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(count * 4));
    if (!is) throw DataError("truncated payload: " + path);

    MultiGrid grid(static_cast<int>(channels), static_cast<int>(rows), static_cast<int>(cols));
    for (size_t i = 0; i < count; ++i) grid.v[i] = static_cast<double>(payload[i]);
    if (spec_out) *spec_out = spec;
    return grid;
}

void dump_grid_text(const std::string& path, const GridSpec& spec, const MultiGrid& grid) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << "wfgrid 1\n";
    os << grid.channels << ' ' << grid.rows << ' ' << grid.cols << ' ' << spec.image_w << ' '
       << spec.image_h << ' ' << spec.downsample << '\n';
    char buf[40];
    for (int ch = 0; ch < grid.channels; ++ch) {
        os << "channel " << ch << '\n';
        for (int r = 0; r < grid.rows; ++r) {
            for (int c = 0; c < grid.cols; ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", grid.at(ch, r, c));
                os << buf << (c + 1 == grid.cols ? '\n' : ' ');
            }
        }
    }
    if (!os) throw DataError("write failed: " + path);
}

}  // namespace wirefield
