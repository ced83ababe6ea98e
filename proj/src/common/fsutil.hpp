#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace inpaint_lab {

namespace fs = std::filesystem;

// Write-temp-then-rename. Readers see either the old file or the complete
// new one, never a partial write.
void write_file_atomic(const fs::path& path, std::string_view contents);
void write_file_atomic(const fs::path& path, std::span<const unsigned char> bytes);

std::string read_file(const fs::path& path);

// Exclusive ownership of a run directory for the lifetime of the object.
class RunDirLock {
 public:
  explicit RunDirLock(const fs::path& run_dir);
  ~RunDirLock();
  RunDirLock(const RunDirLock&) = delete;
  RunDirLock& operator=(const RunDirLock&) = delete;

 private:
  fs::path lock_path_;
  int fd_ = -1;
};

}  // namespace inpaint_lab
