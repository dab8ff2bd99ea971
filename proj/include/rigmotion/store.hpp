#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace rigmotion {

enum class DocKind { skeleton, clip, session, controller };

std::string_view to_string(DocKind kind);

// Directory of JSON/text documents, one subdirectory per kind. Every write
// goes to a temporary file in the target directory, is fsynced, then renamed
// over the final name, so readers see either the old or the new document and
// an interrupted write leaves only an ignored ".tmp-*" file behind.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Content-addressed write; identical documents share an id.
  std::string put_content(DocKind kind, const std::string& document);

  // Writes or replaces the document under `id`.
  void put(DocKind kind, const std::string& id, const std::string& document);

  // Writes only if `id` is free. Returns false when it already exists.
  bool create(DocKind kind, const std::string& id, const std::string& document);

  std::optional<std::string> get(DocKind kind, const std::string& id) const;
  bool contains(DocKind kind, const std::string& id) const;

  // First 32 hex digits of the SHA-256 of the document.
  static std::string content_id(std::string_view document);
  // 32 random hex digits.
  static std::string random_id();
  // Ids are 1-128 characters from [A-Za-z0-9_-].
  static bool valid_id(std::string_view id);

 private:
  std::filesystem::path path_for(DocKind kind, const std::string& id) const;
  std::filesystem::path write_temp(const std::filesystem::path& target, const std::string& document) const;
  void write_atomic(const std::filesystem::path& target, const std::string& document) const;

  std::filesystem::path root_;
};

}  // namespace rigmotion
