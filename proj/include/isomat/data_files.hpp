#pragma once

#include "isomat/design.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace isomat {

// $ISOMAT_DATA_DIR if set, otherwise the data directory of the source tree.
std::string data_dir();
std::string data_path(const std::string& relative);

// 64-bit FNV-1a of the file bytes.
std::uint64_t fnv1a_file(const std::string& path);

// Compares a bundled file against data/MANIFEST ("<hex hash>  <relative path>" lines).
// Throws DataError when the file is missing, unlisted or altered.
void verify_bundled(const std::string& relative);

// Gradient tables: header "b,ux,uy,uz" or "ux,uy,uz" (b = 1).  Rows are
// normalized to unit length; b = 0 rows are b0 acquisitions.
std::vector<Acquisition> read_gradient_table(const std::string& path);
void write_gradient_table(const std::string& path, const std::vector<Acquisition>& rows);

SphericalDesign load_design(const std::string& path, int order, const std::string& name = "");

// Rewrites data/MANIFEST from the current files (used by the maintenance CLI).
void write_manifest(const std::vector<std::string>& relatives);

}  // namespace isomat
