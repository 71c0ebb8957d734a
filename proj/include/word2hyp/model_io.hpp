#pragma once

// Word2Vec-compatible embedding files, the key=value metadata sidecar,
// vocabulary count files and two-array checkpoints.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"
#include "model.hpp"

namespace w2h {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void fail_at(const std::string& source, std::size_t line, const std::string& msg) {
  throw FormatError(source + ":" + std::to_string(line) + ": " + msg);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline void parse_header(const std::string& line, const std::string& source, std::size_t& vocab,
                         std::size_t& dim) {
  auto f = split_ws(line);
  if (f.size() != 2 || !parse_number(f[0], vocab) || !parse_number(f[1], dim)) {
    fail_at(source, 1, "malformed header, expected \"<vocab size> <dimension>\"");
  }
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return in;
}

inline void write_floats_le(std::ostream& out, std::span<const float> v) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
  } else {
    for (float x : v) {
      auto bits = std::bit_cast<std::uint32_t>(x);
      char b[4] = {char(bits), char(bits >> 8), char(bits >> 16), char(bits >> 24)};
      out.write(b, 4);
    }
  }
}

inline bool read_floats_le(std::istream& in, std::span<float> v) {
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != v.size() * sizeof(float)) return false;
  if constexpr (std::endian::native != std::endian::little) {
    for (float& x : v) {
      auto bits = std::bit_cast<std::uint32_t>(x);
      bits = (bits >> 24) | ((bits >> 8) & 0xff00u) | ((bits << 8) & 0xff0000u) | (bits << 24);
      x = std::bit_cast<float>(bits);
    }
  }
  return true;
}

}  // namespace detail

// --- text format -----------------------------------------------------------

inline void write_text(std::ostream& out, const Embeddings& emb) {
  out << emb.size() << ' ' << emb.dim() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < emb.size(); ++r) {
    out << emb.words()[r];
    for (float x : emb.vectors().row(r)) {
      std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(x));
      out << buf;
    }
    out << '\n';
  }
}

inline Embeddings read_text(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) detail::fail_at(source, 1, "missing header");
  std::size_t vocab = 0, dim = 0;
  detail::parse_header(line, source, vocab, dim);
  std::vector<std::string> words;
  Matrix<float> m(vocab, dim);
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  for (std::size_t r = 0; r < vocab; ++r) {
    if (!std::getline(in, line)) {
      detail::fail_at(source, line_no + 1,
                      "unexpected end of file: header declares " + std::to_string(vocab) +
                          " records, found " + std::to_string(r));
    }
    ++line_no;
    auto f = detail::split_ws(line);
    if (f.size() != dim + 1) {
      detail::fail_at(source, line_no,
                      "expected a word and " + std::to_string(dim) + " numbers, found " +
                          std::to_string(f.empty() ? 0 : f.size() - 1) + " fields");
    }
    auto row = m.row(r);
    for (std::size_t c = 0; c < dim; ++c) {
      if (!detail::parse_number(f[c + 1], row[c])) {
        detail::fail_at(source, line_no, "non-numeric field '" + std::string(f[c + 1]) + "'");
      }
    }
    if (!seen.emplace(f[0]).second) {
      detail::fail_at(source, line_no, "duplicate word '" + std::string(f[0]) + "'");
    }
    words.emplace_back(f[0]);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::split_ws(line).empty()) {
      detail::fail_at(source, line_no, "more records than the header declares");
    }
  }
  return Embeddings(std::move(words), std::move(m));
}

inline void save_text(const Embeddings& emb, const std::string& path) {
  auto out = detail::open_out(path);
  write_text(out, emb);
  if (!out) throw FormatError("write failed for '" + path + "'");
}

inline Embeddings load_text(const std::string& path) {
  auto in = detail::open_in(path);
  return read_text(in, path);
}

// --- binary format ---------------------------------------------------------
// "V d\n" then per record: word, ' ', d little-endian float32, '\n'.

inline void write_binary(std::ostream& out, const Embeddings& emb) {
  out << emb.size() << ' ' << emb.dim() << '\n';
  for (std::size_t r = 0; r < emb.size(); ++r) {
    out << emb.words()[r] << ' ';
    detail::write_floats_le(out, emb.vectors().row(r));
    out << '\n';
  }
}

inline Embeddings read_binary(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) detail::fail_at(source, 1, "missing header");
  std::size_t vocab = 0, dim = 0;
  detail::parse_header(line, source, vocab, dim);
  std::vector<std::string> words;
  words.reserve(vocab);
  Matrix<float> m(vocab, dim);
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < vocab; ++r) {
    const std::string where = "record " + std::to_string(r + 1);
    std::string word;
    int ch;
    while ((ch = in.get()) != EOF && (ch == '\n' || ch == '\r' || ch == ' ' || ch == '\t')) {
    }
    while (ch != EOF && ch != ' ') {
      word.push_back(static_cast<char>(ch));
      ch = in.get();
    }
    if (ch == EOF) {
      throw FormatError(source + ": truncated file at " + where + ": header declares " +
                        std::to_string(vocab) + " records");
    }
    if (!detail::read_floats_le(in, m.row(r))) {
      throw FormatError(source + ": truncated file inside " + where + " ('" + word + "')");
    }
    if (in.peek() == '\n') in.get();
    if (!seen.emplace(word, r).second) throw FormatError(source + ": duplicate word '" + word + "' at " + where);
    words.push_back(std::move(word));
  }
  return Embeddings(std::move(words), std::move(m));
}

inline void save_binary(const Embeddings& emb, const std::string& path) {
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  write_binary(out, emb);
  if (!out) throw FormatError("write failed for '" + path + "'");
}

inline Embeddings load_binary(const std::string& path) {
  auto in = detail::open_in(path, std::ios::in | std::ios::binary);
  return read_binary(in, path);
}

// --- metadata sidecar --------------------------------------------------------

using Metadata = std::map<std::string, std::string>;

inline std::string meta_path(const std::string& path) { return path + ".meta"; }

inline void save_meta(const Metadata& meta, const std::string& path) {
  auto out = detail::open_out(path);
  for (const auto& [k, v] : meta) out << k << '=' << v << '\n';
}

inline Metadata load_meta(const std::string& path) {
  auto in = detail::open_in(path);
  Metadata meta;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) detail::fail_at(path, line_no, "expected key=value");
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return meta;
}

/// Loads an embedding file in either format. The sidecar's "format" key
/// decides when present; otherwise text is tried first, then binary.
inline Embeddings load_embeddings(const std::string& path) {
  std::ifstream probe(meta_path(path));
  if (probe) {
    const Metadata meta = load_meta(meta_path(path));
    if (auto it = meta.find("format"); it != meta.end()) {
      return it->second == "binary" ? load_binary(path) : load_text(path);
    }
  }
  try {
    return load_text(path);
  } catch (const FormatError&) {
    return load_binary(path);
  }
}

// --- vocabulary counts -------------------------------------------------------
// One "word count" line per vocabulary entry, in id order.

inline void save_counts(const Vocabulary& vocab, const std::string& path) {
  auto out = detail::open_out(path);
  for (const auto& e : vocab.entries()) out << e.word << ' ' << e.count << '\n';
}

inline Vocabulary load_counts(const std::string& path) {
  auto in = detail::open_in(path);
  std::vector<VocabEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = detail::split_ws(line);
    if (f.empty()) continue;
    VocabEntry e;
    if (f.size() != 2 || !detail::parse_number(f[1], e.count)) {
      detail::fail_at(path, line_no, "expected \"<word> <count>\"");
    }
    e.word = std::string(f[0]);
    entries.push_back(std::move(e));
  }
  try {
    return Vocabulary(std::move(entries));
  } catch (const CorpusError& err) {
    throw FormatError(path + ": " + err.what());
  }
}

// --- checkpoints ---------------------------------------------------------------
// A header line, then the emit array and the ctx array, each in the binary
// embedding format.

inline constexpr std::string_view kCheckpointMagic = "word2hyp-checkpoint";

inline void save_checkpoint(const ModelParams<float>& params, const Vocabulary& vocab,
                            const std::string& path) {
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  out << kCheckpointMagic << " 1 mode=" << to_string(params.mode) << " arch=" << to_string(params.arch)
      << '\n';
  std::vector<std::string> words;
  for (const auto& e : vocab.entries()) words.push_back(e.word);
  write_binary(out, Embeddings(words, params.emit));
  write_binary(out, Embeddings(words, params.ctx));
  if (!out) throw FormatError("write failed for '" + path + "'");
}

struct Checkpoint {
  std::vector<std::string> words;
  ModelParams<float> params;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  auto in = detail::open_in(path, std::ios::in | std::ios::binary);
  std::string line;
  std::getline(in, line);
  auto f = detail::split_ws(line);
  if (f.size() != 4 || f[0] != kCheckpointMagic || f[1] != "1" || !f[2].starts_with("mode=") ||
      !f[3].starts_with("arch=")) {
    detail::fail_at(path, 1, "not a word2hyp checkpoint");
  }
  Checkpoint ck;
  try {
    ck.params.mode = parse_mode(f[2].substr(5));
    ck.params.arch = parse_architecture(f[3].substr(5));
  } catch (const std::invalid_argument& e) {
    detail::fail_at(path, 1, e.what());
  }
  Embeddings emit = read_binary(in, path);
  Embeddings ctx = read_binary(in, path);
  if (emit.words() != ctx.words() || emit.dim() != ctx.dim()) {
    throw FormatError(path + ": checkpoint arrays disagree in shape or vocabulary");
  }
  ck.words = emit.words();
  ck.params.emit = emit.vectors();
  ck.params.ctx = ctx.vectors();
  return ck;
}

}  // namespace w2h
