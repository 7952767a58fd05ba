#include "coregae/embedding_io.h"

#include <array>
#include <bit>
#include <fstream>
#include <string>

#include "coregae/error.h"
#include "coregae/graph.h"
#include "text_io.h"

namespace coregae {
namespace {

constexpr std::array<char, 4> kMagic = {'G', 'A', 'E', 'Z'};
constexpr std::uint8_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw ParseError(path.string() + ": truncated GAEZ file");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

std::filesystem::path ids_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".ids");
}

}  // namespace

void write_embedding_tsv(const std::filesystem::path& path, const DenseMatrix& z,
                         std::span<const std::uint64_t> ids) {
  if (!ids.empty() && ids.size() != z.rows()) {
    throw ValidationError("embedding has " + std::to_string(z.rows()) +
                          " rows but " + std::to_string(ids.size()) + " ids");
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  std::string line;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    line = std::to_string(ids.empty() ? i : ids[i]);
    for (double v : z.row(i)) {
      line += '\t';
      line += detail::format_double(v);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw ValidationError("write failed: " + path.string());
}

Embedding read_embedding_tsv(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<std::uint64_t> ids;
  std::vector<double> values;
  std::size_t f = 0;
  bool first = true;
  detail::for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
    auto fields = detail::split_fields(line);
    if (fields.size() < 2) {
      throw ParseError(path.string() + ": " +
                       detail::line_error(line_no, "expected id and values", line));
    }
    if (first) {
      f = fields.size() - 1;
      first = false;
    } else if (fields.size() - 1 != f) {
      throw ParseError(path.string() + ": " +
                       detail::line_error(line_no, "inconsistent column count", line));
    }
    std::uint64_t id = 0;
    if (!detail::parse_number(fields[0], id)) {
      throw ParseError(path.string() + ": " +
                       detail::line_error(line_no, "bad node id", line));
    }
    ids.push_back(id);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      if (!detail::parse_number(fields[k], v)) {
        throw ParseError(path.string() + ": " +
                         detail::line_error(line_no, "non-numeric value", line));
      }
      values.push_back(v);
    }
  });
  Embedding e;
  e.z = DenseMatrix(ids.size(), f);
  std::copy(values.begin(), values.end(), e.z.data().begin());
  e.ids = std::move(ids);
  return e;
}

void write_embedding_gaez(const std::filesystem::path& path, const DenseMatrix& z) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kVersion));
  put_u64(out, z.rows());
  put_u64(out, z.cols());
  for (double v : z.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw ValidationError("write failed: " + path.string());
}

DenseMatrix read_embedding_gaez(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError(path.string() + ": not a GAEZ file");
  }
  const int version = in.get();
  if (version != kVersion) {
    throw ParseError(path.string() + ": unsupported GAEZ version " +
                     std::to_string(version));
  }
  const std::uint64_t n = get_u64(in, path);
  const std::uint64_t f = get_u64(in, path);
  const auto size = std::filesystem::file_size(path);
  if (f != 0 && n > (size / 8) / f) {
    throw ParseError(path.string() + ": header size exceeds file length");
  }
  DenseMatrix z(n, f);
  for (double& v : z.data()) v = std::bit_cast<double>(get_u64(in, path));
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(path.string() + ": trailing bytes after GAEZ payload");
  }
  return z;
}

bool is_gaez_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, 4> magic{};
  return in.read(magic.data(), magic.size()) && magic == kMagic;
}

void write_embedding(const std::filesystem::path& path, const DenseMatrix& z,
                     std::span<const std::uint64_t> ids) {
  if (path.extension() == ".gaez") {
    write_embedding_gaez(path, z);
    std::vector<std::uint64_t> all(ids.begin(), ids.end());
    if (all.empty()) {
      all.resize(z.rows());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    }
    write_id_map(ids_path(path), all);
  } else {
    write_embedding_tsv(path, z, ids);
  }
}

Embedding read_embedding(const std::filesystem::path& path) {
  if (!is_gaez_file(path)) return read_embedding_tsv(path);
  Embedding e;
  e.z = read_embedding_gaez(path);
  if (std::filesystem::exists(ids_path(path))) {
    e.ids = read_id_map(ids_path(path));
    if (e.ids.size() != e.z.rows()) {
      throw ValidationError(ids_path(path).string() + ": " +
                            std::to_string(e.ids.size()) + " ids for " +
                            std::to_string(e.z.rows()) + " rows");
    }
  } else {
    e.ids.resize(e.z.rows());
    for (std::size_t i = 0; i < e.ids.size(); ++i) e.ids[i] = i;
  }
  return e;
}

}  // namespace coregae
