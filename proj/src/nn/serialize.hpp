#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace inpaint_lab::nn {

// Binary weights container:
//   "ILTC" | u32 version | u32 count | count x entry
//   entry = u32 name_len | name | i32 n,c,h,w | u8 dtype (0 f32, 1 f64) | raw LE data
// Values are stored in the tensor's own precision, so load(save(x)) is
// bit-exact.
template <class T>
std::string encode_tensors(const std::vector<StateEntry<T>>& entries);

// Loads into the given entries, which must match the stored names and
// shapes one for one. Mismatches throw RuntimeFailure naming the entry.
template <class T>
void decode_tensors(const std::string& bytes, const std::vector<StateEntry<T>>& entries,
                    const std::string& source);

template <class T>
void save_tensors(const std::filesystem::path& path, const std::vector<StateEntry<T>>& entries);
template <class T>
void load_tensors(const std::filesystem::path& path, const std::vector<StateEntry<T>>& entries);

}  // namespace inpaint_lab::nn
