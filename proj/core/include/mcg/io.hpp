#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mcg/hierarchy.hpp"
#include "mcg/types.hpp"

namespace mcg {

/// Binary PGM (P5) or PPM (P6) with maxval 255; values scaled into [0,1].
Image load_image(const std::filesystem::path& path);
/// Writes P5 for one channel, P6 for three; values are rounded to 8 bits.
void save_image(const Image& image, const std::filesystem::path& path);

// Label map file: "MCGL", u8 version = 1, u32 H, u32 W, H*W u32 labels (all LE).
void write_labelmap(std::ostream& out, const LabelMap& map);
LabelMap read_labelmap(std::istream& in);
void save_labelmap(const LabelMap& map, const std::filesystem::path& path);
LabelMap load_labelmap(const std::filesystem::path& path);

// Contour map file: "MCGC", u8 version = 1, u32 H, u32 W, (2H-1)(2W-1) f32.
void save_contour_map(const ContourMap& cm, const std::filesystem::path& path);
ContourMap load_contour_map(const std::filesystem::path& path);

// Ucm file: a label map file for the finest partition followed by
// {"merges":[{"id":..,"children":[..],"lambda":..},..]}.
std::string ucm_to_bytes(const Ucm& u);
Ucm ucm_from_bytes(const std::string& bytes);
void save_ucm(const Ucm& u, const std::filesystem::path& path);
Ucm load_ucm(const std::filesystem::path& path);

/// Accepts an MCGL label file holding raw instance ids, or a P5 PGM whose
/// grey level is the instance id. Ids must be contiguous from 1.
InstanceGroundTruth load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const InstanceGroundTruth& gt, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace mcg
