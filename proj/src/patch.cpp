// Copyright 2026 The Semixup Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "semixup/patch.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "semixup/error.hpp"

namespace semixup {

static_assert(std::endian::native == std::endian::little, "blob IO assumes a little-endian host");

bool PatchPair::valid() const {
  if (lateral.width != lateral.height || medial.width != lateral.width || medial.height != lateral.height) return false;
  for (const ImageF* img : {&lateral, &medial})
    for (float v : img->data)
      if (!(v >= -1.0f && v <= 1.0f)) return false;
  return true;
}

void write_pair_blob(const std::filesystem::path& path, const PatchPair& pair) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const ImageF* img : {&pair.lateral, &pair.medial})
    out.write(reinterpret_cast<const char*>(img->data.data()),
              static_cast<std::streamsize>(img->data.size() * sizeof(float)));
  if (!out) throw Error(ErrorCode::kIoError, "short write " + path.string());
}

PatchPair read_pair_blob(const std::filesystem::path& path) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kMissingFile, path.string());
  const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(bytes) / 8.0)));
  if (side <= 0 || static_cast<std::uintmax_t>(side) * side * 8 != bytes)
    throw Error(ErrorCode::kParseError, path.string() + ": size is not 8*side^2 bytes");
  std::ifstream in(path, std::ios::binary);
  PatchPair pair(side);
  for (ImageF* img : {&pair.lateral, &pair.medial})
    in.read(reinterpret_cast<char*>(img->data.data()), static_cast<std::streamsize>(img->data.size() * sizeof(float)));
  if (!in) throw Error(ErrorCode::kIoError, "short read " + path.string());
  return pair;
}

}  // namespace semixup
