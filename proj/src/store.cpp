#include "rigmotion/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <openssl/evp.h>

#include "rigmotion/errors.hpp"

namespace rigmotion {
namespace {

std::string hex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out += kDigits[data[i] >> 4];
    out += kDigits[data[i] & 0xF];
  }
  return out;
}

[[noreturn]] void io_error(const std::string& what) {
  throw Error("IoError", what + ": " + std::strerror(errno));
}

}  // namespace

std::string_view to_string(DocKind kind) {
  switch (kind) {
    case DocKind::skeleton: return "skeletons";
    case DocKind::clip: return "clips";
    case DocKind::session: return "sessions";
    case DocKind::controller: return "controllers";
  }
  return "unknown";
}

Store::Store(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (DocKind kind : {DocKind::skeleton, DocKind::clip, DocKind::session, DocKind::controller}) {
    std::filesystem::create_directories(root_ / to_string(kind), ec);
    if (ec) throw Error("IoError", "cannot create store directory " + (root_ / to_string(kind)).string());
  }
}

std::string Store::put_content(DocKind kind, const std::string& document) {
  const std::string id = content_id(document);
  const auto path = path_for(kind, id);
  if (!std::filesystem::exists(path)) write_atomic(path, document);
  return id;
}

void Store::put(DocKind kind, const std::string& id, const std::string& document) {
  if (!valid_id(id)) throw Error("InvalidArgument", "invalid document id '" + id + "'");
  write_atomic(path_for(kind, id), document);
}

bool Store::create(DocKind kind, const std::string& id, const std::string& document) {
  if (!valid_id(id)) throw Error("InvalidArgument", "invalid document id '" + id + "'");
  const auto target = path_for(kind, id);
  const auto temp = write_temp(target, document);
  // link() refuses to replace an existing name, so two creators cannot both win.
  const int rc = ::link(temp.c_str(), target.c_str());
  const int link_errno = errno;
  ::unlink(temp.c_str());
  if (rc != 0) {
    if (link_errno == EEXIST) return false;
    errno = link_errno;
    io_error("cannot create " + target.string());
  }
  return true;
}

std::optional<std::string> Store::get(DocKind kind, const std::string& id) const {
  if (!valid_id(id)) return std::nullopt;
  std::ifstream in(path_for(kind, id), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool Store::contains(DocKind kind, const std::string& id) const {
  return valid_id(id) && std::filesystem::exists(path_for(kind, id));
}

std::string Store::content_id(std::string_view document) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(document.data(), document.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("IoError", "SHA-256 failed");
  }
  return hex(digest.data(), 16);
}

std::string Store::random_id() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::array<unsigned char, 16> bytes{};
  for (std::size_t i = 0; i < bytes.size(); i += 8) {
    const std::uint64_t v = rng();
    std::memcpy(bytes.data() + i, &v, 8);
  }
  return hex(bytes.data(), bytes.size());
}

bool Store::valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::filesystem::path Store::path_for(DocKind kind, const std::string& id) const {
  return root_ / to_string(kind) / (id + ".json");
}

std::filesystem::path Store::write_temp(const std::filesystem::path& target, const std::string& document) const {
  const auto temp = target.parent_path() / (".tmp-" + random_id());
  const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) io_error("cannot write " + temp.string());
  std::size_t written = 0;
  while (written < document.size()) {
    const ssize_t n = ::write(fd, document.data() + written, document.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      ::unlink(temp.c_str());
      io_error("cannot write " + temp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(temp.c_str());
    io_error("cannot flush " + temp.string());
  }
  return temp;
}

void Store::write_atomic(const std::filesystem::path& target, const std::string& document) const {
  const auto temp = write_temp(target, document);
  if (::rename(temp.c_str(), target.c_str()) != 0) {
    ::unlink(temp.c_str());
    io_error("cannot rename into " + target.string());
  }
}

}  // namespace rigmotion
