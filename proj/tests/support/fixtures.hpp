#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aufair/dataio.hpp"
#include "aufair/random.hpp"

namespace fixture {

// Synthetic lending-style table: numeric "score" and "hours", categorical
// "region" (north/south/east/west) and "plan" (basic/plus). The true label
// depends on score and region; the recorded black-box label additionally
// penalizes z = 0, so h is biased against group 0.
struct Toy {
    aufair::Table table;
    std::vector<std::uint8_t> h;
};

Toy make_toy(std::size_t n, std::uint64_t seed, double h_penalty = 0.35, bool independent_z = false);

// Toy binarized with a vocabulary fitted on itself.
aufair::BinarizedDataset binarize_toy(const Toy& toy, const aufair::DiscretizeOptions& options = {});

// CSV text for the toy (header plus rows), matching toy_schema_json().
// Dataset straight from a 0/1 matrix, one condition per column, named
// "f<j> = 1" unless `names` gives the rendered text ("feature = value").
aufair::BinarizedDataset from_bits(const std::vector<std::vector<int>>& rows, std::vector<std::uint8_t> h,
                                   std::vector<std::uint8_t> z = {},
                                   std::optional<std::vector<std::uint8_t>> y = std::nullopt,
                                   const std::vector<std::string>& names = {});

std::string toy_csv(const Toy& toy);
std::string toy_schema_json(bool with_blackbox = true);

} // namespace fixture
