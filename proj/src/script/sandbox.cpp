#include "pathagent/script/sandbox.hpp"

#include <algorithm>

#include "pathagent/script/errors.hpp"

namespace fs = std::filesystem;

namespace pathagent::script {

namespace {

fs::path canonical_root(const fs::path& p) {
  std::error_code ec;
  auto c = fs::weakly_canonical(fs::absolute(p), ec);
  return ec ? fs::absolute(p).lexically_normal() : c;
}

}  // namespace

bool path_within(const fs::path& p, const fs::path& root) {
  auto pi = p.begin();
  for (auto ri = root.begin(); ri != root.end(); ++ri) {
    if (ri->empty()) continue;  // trailing separator
    if (pi == p.end() || *pi != *ri) return false;
    ++pi;
  }
  return true;
}

Sandbox::Sandbox(fs::path working_dir, std::vector<fs::path> read_only_roots)
    : working_dir_(canonical_root(working_dir)) {
  for (const auto& r : read_only_roots) read_roots_.push_back(canonical_root(r));
}

bool Sandbox::permits(const fs::path& p, Access access) const {
  if (path_within(p, working_dir_)) return true;
  if (access == Access::Write) return false;
  return std::any_of(read_roots_.begin(), read_roots_.end(),
                     [&](const fs::path& r) { return path_within(p, r); });
}

fs::path Sandbox::resolve(std::string_view user_path, Access access) const {
  fs::path p{std::string(user_path)};
  if (p.is_relative()) p = working_dir_ / p;
  std::error_code ec;
  fs::path resolved = fs::weakly_canonical(p, ec);
  if (ec) resolved = p.lexically_normal();
  if (!permits(resolved, access)) {
    throw SandboxViolationError("path '" + std::string(user_path) + "' resolves outside the " +
                                (access == Access::Write ? std::string("working directory")
                                                         : std::string("permitted directories")));
  }
  return resolved;
}

void Sandbox::record_write(const fs::path& resolved) {
  auto rel = resolved.lexically_relative(working_dir_).generic_string();
  if (std::find(written_.begin(), written_.end(), rel) == written_.end()) {
    written_.push_back(rel);
  }
}

}  // namespace pathagent::script
