// Copyright 2026 The relpcnn Authors.
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

#include "relpcnn/diff/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace relpcnn::diff {

namespace {

constexpr char kMagic[8] = {'R', 'P', 'C', 'N', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kByteOrderMark = 0x01020304;
// Guards against allocating absurd sizes from a corrupt header.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

template <typename U>
void Put(std::ostream &out, U value) {
  out.write(reinterpret_cast<const char *>(&value), sizeof(U));
}

template <typename U>
U Get(std::istream &in) {
  U value{};
  in.read(reinterpret_cast<char *>(&value), sizeof(U));
  if (!in) throw LoadError("checkpoint truncated");
  return value;
}

std::string GetString(std::istream &in, std::uint64_t length) {
  if (length > kMaxElements) throw LoadError("checkpoint string too long");
  std::string s(length, '\0');
  in.read(s.data(), static_cast<std::streamsize>(length));
  if (!in) throw LoadError("checkpoint truncated");
  return s;
}

}  // namespace

template <typename T>
const Tensor<T> &Checkpoint<T>::get(const std::string &name) const {
  for (const NamedTensor<T> &t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw LoadError("checkpoint has no tensor named '" + name + "'");
}

template <typename T>
void write_checkpoint(std::ostream &out, const Checkpoint<T> &checkpoint) {
  out.write(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(out, kCheckpointVersion);
  Put<std::uint32_t>(out, kByteOrderMark);
  Put<std::uint32_t>(out, sizeof(T));
  Put<std::uint64_t>(out, checkpoint.metadata.size());
  out.write(checkpoint.metadata.data(),
            static_cast<std::streamsize>(checkpoint.metadata.size()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const NamedTensor<T> &t : checkpoint.tensors) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(t.tensor.rank()));
    for (std::size_t d : t.tensor.shape()) Put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char *>(t.tensor.data().data()),
              static_cast<std::streamsize>(t.tensor.size() * sizeof(T)));
  }
  if (!out) throw LoadError("failed to write checkpoint");
}

template <typename T>
Checkpoint<T> read_checkpoint(std::istream &in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw LoadError("not a checkpoint file");
  }
  const auto version = Get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw LoadError("unsupported checkpoint version " + std::to_string(version));
  }
  if (Get<std::uint32_t>(in) != kByteOrderMark) {
    throw LoadError("checkpoint byte order does not match this machine");
  }
  const auto scalar_bytes = Get<std::uint32_t>(in);
  if (scalar_bytes != sizeof(T)) {
    throw LoadError("checkpoint stores " + std::to_string(scalar_bytes) +
                    "-byte scalars, expected " + std::to_string(sizeof(T)));
  }
  Checkpoint<T> checkpoint;
  checkpoint.metadata = GetString(in, Get<std::uint64_t>(in));
  const auto count = Get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor<T> t;
    t.name = GetString(in, Get<std::uint32_t>(in));
    const auto rank = Get<std::uint32_t>(in);
    Shape shape;
    std::uint64_t elements = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape.push_back(Get<std::uint64_t>(in));
      elements *= shape.back();
      if (elements > kMaxElements) throw LoadError("checkpoint tensor too large");
    }
    std::vector<T> data(elements);
    in.read(reinterpret_cast<char *>(data.data()),
            static_cast<std::streamsize>(elements * sizeof(T)));
    if (!in) throw LoadError("checkpoint truncated in tensor '" + t.name + "'");
    t.tensor = Tensor<T>(std::move(shape), std::move(data));
    checkpoint.tensors.push_back(std::move(t));
  }
  return checkpoint;
}

template <typename T>
void save_checkpoint(const std::filesystem::path &path,
                     const Checkpoint<T> &checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot write '" + path.string() + "'");
  write_checkpoint(out, checkpoint);
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  try {
    return read_checkpoint<T>(in);
  } catch (const LoadError &e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

template struct Checkpoint<float>;
template struct Checkpoint<double>;
template void write_checkpoint(std::ostream &, const Checkpoint<float> &);
template void write_checkpoint(std::ostream &, const Checkpoint<double> &);
template Checkpoint<float> read_checkpoint(std::istream &);
template Checkpoint<double> read_checkpoint(std::istream &);
template void save_checkpoint(const std::filesystem::path &,
                              const Checkpoint<float> &);
template void save_checkpoint(const std::filesystem::path &,
                              const Checkpoint<double> &);
template Checkpoint<float> load_checkpoint(const std::filesystem::path &);
template Checkpoint<double> load_checkpoint(const std::filesystem::path &);

}  // namespace relpcnn::diff
