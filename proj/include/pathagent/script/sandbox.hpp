#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pathagent::script {

enum class Access { Read, Write };

/// Filesystem confinement for interpreted code. Reads are allowed under the
/// working directory and any read-only root; writes only under the working
/// directory. Paths are resolved lexically and through existing symlinks.
class Sandbox {
 public:
  Sandbox(std::filesystem::path working_dir, std::vector<std::filesystem::path> read_only_roots);

  /// Resolves a script-supplied path (relative paths are taken from the
  /// working directory). Throws SandboxViolationError.
  std::filesystem::path resolve(std::string_view user_path, Access access) const;

  /// True if `p` (absolute) lies inside the permitted roots for `access`.
  bool permits(const std::filesystem::path& p, Access access) const;

  void record_write(const std::filesystem::path& resolved);

  /// Written files relative to the working directory, in first-write order.
  const std::vector<std::string>& files_written() const { return written_; }
  const std::filesystem::path& working_dir() const { return working_dir_; }

 private:
  std::filesystem::path working_dir_;
  std::vector<std::filesystem::path> read_roots_;
  std::vector<std::string> written_;
};

/// Component-wise prefix test on normalized absolute paths.
bool path_within(const std::filesystem::path& p, const std::filesystem::path& root);

}  // namespace pathagent::script
