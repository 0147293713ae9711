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

#include <string>

#include "wirefield/geom.hpp"
#include "wirefield/grid.hpp"

namespace wirefield {

/// Flat binary grid container shared by every serialized map.
///
/// Layout (little-endian):
///   8 bytes   magic "WFGRID1\0"
///   6 x u32   channels, rows, cols, image_w, image_h, downsample
///   payload   channels*rows*cols float32, channel-major then row-major
///
/// Values are narrowed to float32 on write; readers get doubles back.
void write_grid_file(const std::string& path, const GridSpec& spec, const MultiGrid& grid);

/// Reads a container written by write_grid_file. Throws DataError on a
/// missing file, bad magic, or truncated payload.
MultiGrid read_grid_file(const std::string& path, GridSpec* spec_out);

/// Lossless text dump of the same content, one channel block per section,
/// 17 significant digits per value. Debugging aid, write-only.
void dump_grid_text(const std::string& path, const GridSpec& spec, const MultiGrid& grid);

}  // namespace wirefield
