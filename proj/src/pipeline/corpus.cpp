#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mocsim/error.hpp"
#include "mocsim/pipeline.hpp"

namespace mocsim::pipeline {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

// Sections start at lines beginning with '#'.
std::vector<std::string_view> sections(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0, pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::size_t next = eol == std::string_view::npos ? text.size() : eol + 1;
    if (text[pos] == '#' && pos > start) {
      out.push_back(text.substr(start, pos - start));
      start = pos;
    }
    pos = next;
  }
  if (start < text.size()) out.push_back(text.substr(start));
  return out;
}

std::string id_for(const std::filesystem::path& path, const std::filesystem::path& base) {
  if (base.empty()) return path.generic_string();
  return std::filesystem::relative(path, base).generic_string();
}

std::vector<std::filesystem::path> files_with(const std::filesystem::path& dir,
                                              std::initializer_list<std::string_view> extensions) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoFailure, dir.string() + " is not a directory");
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<Chunk> chunk_document(std::string_view text, const std::string& source) {
  std::vector<Chunk> out;
  const std::size_t stride = kChunkSize - kChunkOverlap;
  for (auto section : sections(text)) {
    if (blank(section)) continue;
    std::size_t start = 0;
    while (true) {
      Chunk c;
      c.kind = ChunkKind::Doc;
      c.source = source;
      c.id = source + "#" + std::to_string(out.size());
      c.text = std::string(section.substr(start, kChunkSize));
      c.tokens = tokenize(c.text);
      out.push_back(std::move(c));
      if (start + kChunkSize >= section.size()) break;
      start += stride;
    }
  }
  return out;
}

Chunk chunk_sample(std::string_view text, const std::string& source) {
  Chunk c;
  c.kind = ChunkKind::CodeSample;
  c.source = source;
  c.id = source + "#0";
  c.text = std::string(text);
  c.tokens = tokenize(text);
  return c;
}

std::vector<Chunk> chunk_corpus(const std::vector<std::filesystem::path>& docs,
                                const std::vector<std::filesystem::path>& samples, const std::filesystem::path& base) {
  std::vector<Chunk> out;
  for (const auto& path : docs) {
    auto chunks = chunk_document(read_file(path), id_for(path, base));
    out.insert(out.end(), std::make_move_iterator(chunks.begin()), std::make_move_iterator(chunks.end()));
  }
  for (const auto& path : samples) out.push_back(chunk_sample(read_file(path), id_for(path, base)));
  return out;
}

std::vector<Chunk> chunk_directories(const std::filesystem::path& docs_dir, const std::filesystem::path& samples_dir) {
  auto docs = chunk_corpus(files_with(docs_dir, {".md", ".txt"}), {}, docs_dir.parent_path());
  auto samples = chunk_corpus({}, files_with(samples_dir, {".mcs"}), samples_dir.parent_path());
  docs.insert(docs.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
  return docs;
}

}  // namespace mocsim::pipeline
