#include "romkit/romx.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <vector>

#include "romkit/error.hpp"

namespace romkit {

static_assert(std::endian::native == std::endian::little, "ROMX I/O assumes a little-endian host");

namespace {

constexpr std::size_t header_size = 4 + 4 + 1 + 1 + 8 + 8;

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_header(std::string& out, std::uint8_t layout, std::uint64_t rows, std::uint64_t cols) {
  out.append("ROMX", 4);
  put(out, romx_version);
  put(out, romx_dtype_f64);
  put(out, layout);
  put(out, rows);
  put(out, cols);
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void need(std::size_t count) const {
    if (bytes_.size() - pos_ < count) corrupt("truncated");
  }

  void need_items(std::uint64_t count, std::size_t item) const {
    if (count > (bytes_.size() - pos_) / item) corrupt("truncated");
  }

  void finish() const {
    if (pos_ != bytes_.size()) corrupt("trailing bytes");
  }

  [[noreturn]] void corrupt(const std::string& what) const {
    fail(ErrorCode::corrupt_package, name_ + ": " + what);
  }

 private:
  std::string_view bytes_;
  const std::string& name_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_romx(const Eigen::MatrixXd& dense) {
  std::string out;
  out.reserve(header_size + static_cast<std::size_t>(dense.size()) * 8);
  put_header(out, romx_layout_dense, static_cast<std::uint64_t>(dense.rows()),
             static_cast<std::uint64_t>(dense.cols()));
  out.append(reinterpret_cast<const char*>(dense.data()), static_cast<std::size_t>(dense.size()) * 8);
  return out;
}

std::string encode_romx(const SparseOperator& sparse) {
  std::string out;
  put_header(out, romx_layout_csr, static_cast<std::uint64_t>(sparse.rows()),
             static_cast<std::uint64_t>(sparse.cols()));
  put(out, static_cast<std::uint64_t>(sparse.nnz()));
  for (const Index o : sparse.row_offsets()) put(out, static_cast<std::uint64_t>(o));
  for (const Index c : sparse.col_indices()) put(out, static_cast<std::uint64_t>(c));
  for (const double v : sparse.values()) put(out, v);
  return out;
}

RomxArray decode_romx(std::string_view bytes, const std::string& name) {
  Reader in(bytes, name);
  in.need(header_size);
  char magic[4];
  for (char& c : magic) c = in.get<char>();
  if (std::memcmp(magic, "ROMX", 4) != 0) in.corrupt("bad magic");
  const auto version = in.get<std::uint32_t>();
  if (version != romx_version) {
    fail(ErrorCode::version_error, name + ": unsupported ROMX version " + std::to_string(version));
  }
  if (in.get<std::uint8_t>() != romx_dtype_f64) in.corrupt("unsupported dtype");
  const auto layout = in.get<std::uint8_t>();
  const auto rows = in.get<std::uint64_t>();
  const auto cols = in.get<std::uint64_t>();
  const std::uint64_t limit = std::uint64_t{1} << 40;
  if (rows > limit || cols > limit) in.corrupt("implausible shape");

  if (layout == romx_layout_dense) {
    if (cols != 0 && rows > limit / cols) in.corrupt("implausible shape");
    in.need_items(rows * cols, 8);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = in.get<double>();
    in.finish();
    return m;
  }
  if (layout == romx_layout_csr) {
    const auto nnz = in.get<std::uint64_t>();
    in.need_items(rows + 1, 8);
    std::vector<Index> offsets(rows + 1);
    for (auto& o : offsets) o = static_cast<Index>(in.get<std::uint64_t>());
    in.need_items(nnz, 16);
    std::vector<Index> indices(nnz);
    for (auto& c : indices) c = static_cast<Index>(in.get<std::uint64_t>());
    std::vector<double> values(nnz);
    for (auto& v : values) v = in.get<double>();
    in.finish();
    try {
      return SparseOperator(static_cast<Index>(rows), static_cast<Index>(cols), std::move(offsets),
                            std::move(indices), std::move(values));
    } catch (const Error& e) {
      in.corrupt(e.what());
    }
  }
  in.corrupt("unknown layout " + std::to_string(layout));
}

Eigen::MatrixXd decode_romx_dense(std::string_view bytes, const std::string& name) {
  auto array = decode_romx(bytes, name);
  if (auto* m = std::get_if<Eigen::MatrixXd>(&array)) return std::move(*m);
  fail(ErrorCode::corrupt_package, name + ": expected a dense array");
}

SparseOperator decode_romx_sparse(std::string_view bytes, const std::string& name) {
  auto array = decode_romx(bytes, name);
  if (auto* s = std::get_if<SparseOperator>(&array)) return std::move(*s);
  fail(ErrorCode::corrupt_package, name + ": expected a CSR array");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace romkit
