#pragma once

#include <map>
#include <string>
#include <vector>

#include "eit/spectrum.hpp"
#include "eit/types.hpp"

namespace eit {

/// One row of the hyperfine constants file: a probe transition at
/// offset_mhz relative to the table's reference line, with its relative
/// strength and the isotope's natural abundance and mass.
struct HyperfineLine {
    std::string isotope;    // e.g. "87Rb"
    std::string transition; // e.g. "F2-Fp3"
    double offset_mhz = 0.0;
    double weight = 0.0;
    double abundance = 0.0;
    double mass_u = 0.0;    // atomic mass units
};

struct HyperfineTable {
    int version = 0;
    std::string reference;
    std::vector<HyperfineLine> lines;
};

/// Parse and checksum-verify a constants file (key = value lines, FNV-1a
/// checksum over the content lines). Throws IoError when the file cannot
/// be opened and ConfigError with file:line context on bad content.
HyperfineTable load_hyperfine_table(const std::string& path);

/// Expand the table into a line stack: every row copies `base`, replacing
/// weight, detuning offset (MHz -> rad/s) and the per-line mass. Entries
/// of gamma_extra_per_isotope override base.gamma_extra for matching
/// isotopes; a key matching no table row is an error.
LineStack build_stack(
    const HyperfineTable& table, const LadderScheme& base,
    const std::map<std::string, double>& gamma_extra_per_isotope = {});

}  // namespace eit
