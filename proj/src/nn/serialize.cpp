#include "nn/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "common/error.hpp"
#include "common/fsutil.hpp"

namespace inpaint_lab::nn {

static_assert(std::endian::native == std::endian::little, "container format is little-endian");

namespace {

constexpr char kMagic[4] = {'I', 'L', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

template <class T>
constexpr std::uint8_t dtype_code() {
  return sizeof(T) == 4 ? 0 : 1;
}

template <class V>
void put(std::string& out, V v) {
  char buf[sizeof(V)];
  std::memcpy(buf, &v, sizeof(V));
  out.append(buf, sizeof(V));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  template <class V>
  V get() {
    need(sizeof(V));
    V v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(V));
    pos_ += sizeof(V);
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void get_raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) fail_runtime(source_ + ": truncated weights container");
  }
  const std::string& bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

template <class T>
std::string encode_tensors(const std::vector<StateEntry<T>>& entries) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    const Shape s = e.tensor->shape();
    put<std::int32_t>(out, s.n);
    put<std::int32_t>(out, s.c);
    put<std::int32_t>(out, s.h);
    put<std::int32_t>(out, s.w);
    put<std::uint8_t>(out, dtype_code<T>());
    out.append(reinterpret_cast<const char*>(e.tensor->data()), e.tensor->numel() * sizeof(T));
  }
  return out;
}

template <class T>
void decode_tensors(const std::string& bytes, const std::vector<StateEntry<T>>& entries,
                    const std::string& source) {
  Reader r(bytes, source);
  if (r.get_string(4) != std::string(kMagic, 4)) fail_runtime(source + ": not a weights container");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion)
    fail_runtime(source + ": unsupported container version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  if (count != entries.size())
    fail_runtime(source + ": architecture mismatch: container has " + std::to_string(count) +
                 " tensors, model expects " + std::to_string(entries.size()));
  for (const auto& e : entries) {
    const auto len = r.get<std::uint32_t>();
    const std::string name = r.get_string(len);
    if (name != e.name)
      fail_runtime(source + ": architecture mismatch: found tensor '" + name + "', expected '" +
                   e.name + "'");
    Shape s;
    s.n = r.get<std::int32_t>();
    s.c = r.get<std::int32_t>();
    s.h = r.get<std::int32_t>();
    s.w = r.get<std::int32_t>();
    if (!(s == e.tensor->shape()))
      fail_runtime(source + ": architecture mismatch for '" + name + "': stored " + s.str() +
                   ", model " + e.tensor->shape().str());
    if (r.get<std::uint8_t>() != dtype_code<T>())
      fail_runtime(source + ": precision mismatch for '" + name + "'");
    r.get_raw(e.tensor->data(), e.tensor->numel() * sizeof(T));
  }
  if (!r.at_end()) fail_runtime(source + ": trailing bytes after last tensor");
}

template <class T>
void save_tensors(const std::filesystem::path& path, const std::vector<StateEntry<T>>& entries) {
  write_file_atomic(path, encode_tensors(entries));
}

template <class T>
void load_tensors(const std::filesystem::path& path, const std::vector<StateEntry<T>>& entries) {
  decode_tensors(read_file(path), entries, path.string());
}

#define INPAINT_LAB_INSTANTIATE(T)                                                              \
  template std::string encode_tensors<T>(const std::vector<StateEntry<T>>&);                    \
  template void decode_tensors<T>(const std::string&, const std::vector<StateEntry<T>>&,        \
                                  const std::string&);                                          \
  template void save_tensors<T>(const std::filesystem::path&, const std::vector<StateEntry<T>>&); \
  template void load_tensors<T>(const std::filesystem::path&, const std::vector<StateEntry<T>>&);

INPAINT_LAB_INSTANTIATE(float)
INPAINT_LAB_INSTANTIATE(double)

#undef INPAINT_LAB_INSTANTIATE

}  // namespace inpaint_lab::nn
