#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>

#include "romkit/sparse.hpp"

namespace romkit {

/// Binary array container, little-endian:
///   "ROMX" | u32 version | u8 dtype | u8 layout | u64 rows | u64 cols | payload
/// Dense payload is rows*cols doubles in column-major order. CSR payload is
/// u64 nnz, rows+1 u64 offsets, nnz u64 column indices, nnz doubles.
inline constexpr std::uint32_t romx_version = 1;
inline constexpr std::uint8_t romx_dtype_f64 = 1;
inline constexpr std::uint8_t romx_layout_dense = 0;
inline constexpr std::uint8_t romx_layout_csr = 1;

using RomxArray = std::variant<Eigen::MatrixXd, SparseOperator>;

std::string encode_romx(const Eigen::MatrixXd& dense);
std::string encode_romx(const SparseOperator& sparse);

/// Throws corrupt_package (mentioning `name`) on any structural problem,
/// version_error on an unknown version.
RomxArray decode_romx(std::string_view bytes, const std::string& name);
Eigen::MatrixXd decode_romx_dense(std::string_view bytes, const std::string& name);
SparseOperator decode_romx_sparse(std::string_view bytes, const std::string& name);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t hash);

}  // namespace romkit
