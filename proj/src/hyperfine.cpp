#include "eit/hyperfine.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eit/checksum.hpp"
#include "eit/constants.hpp"

namespace eit {

std::string checksum_string(std::string_view data) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

namespace {

std::string strip(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_number(const std::string& token, const std::string& context) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ConfigError(context + ": not a number: '" + token + "'");
    }
    if (used != token.size()) {
        throw ConfigError(context + ": trailing junk in number: '" + token +
                          "'");
    }
    return value;
}

}  // namespace

HyperfineTable load_hyperfine_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open constants file: " + path);
    }

    HyperfineTable table;
    std::string hashed;  // content lines joined by '\n', checksum input
    std::string expected;
    std::string raw;
    int lineno = 0;
    bool have_version = false;

    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip(raw);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::string context = path + ":" + std::to_string(lineno);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(context + ": expected 'key = value'");
        }
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));

        if (key == "checksum") {
            if (!expected.empty()) {
                throw ConfigError(context + ": duplicate checksum");
            }
            if (value.empty()) {
                throw ConfigError(context + ": empty checksum");
            }
            expected = value;
            continue;
        }
        if (!expected.empty()) {
            throw ConfigError(context + ": content after checksum line");
        }
        if (!hashed.empty()) {
            hashed += '\n';
        }
        hashed += line;

        if (key == "version") {
            table.version =
                static_cast<int>(parse_number(value, context));
            have_version = true;
        } else if (key == "reference") {
            table.reference = value;
        } else if (key == "line") {
            std::istringstream fields(value);
            HyperfineLine entry;
            std::string off, wgt, abd, mass;
            if (!(fields >> entry.isotope >> entry.transition >> off >>
                  wgt >> abd >> mass)) {
                throw ConfigError(
                    context +
                    ": expected 'isotope transition offset_MHz weight "
                    "abundance mass_u'");
            }
            std::string extra;
            if (fields >> extra) {
                throw ConfigError(context + ": unexpected field '" + extra +
                                  "'");
            }
            entry.offset_mhz = parse_number(off, context);
            entry.weight = parse_number(wgt, context);
            entry.abundance = parse_number(abd, context);
            entry.mass_u = parse_number(mass, context);
            if (entry.weight < 0.0 || entry.abundance < 0.0 ||
                entry.mass_u <= 0.0) {
                throw ConfigError(context + ": negative weight/abundance "
                                            "or non-positive mass");
            }
            table.lines.push_back(entry);
        } else {
            throw ConfigError(context + ": unknown key '" + key + "'");
        }
    }

    if (expected.empty()) {
        throw ConfigError(path + ": missing checksum line");
    }
    const std::string actual = checksum_string(hashed);
    if (actual != expected) {
        throw ConfigError(path + ": checksum mismatch (expected " +
                          expected + ", content hashes to " + actual + ")");
    }
    if (!have_version || table.version != 1) {
        throw ConfigError(path + ": unsupported version (want 1)");
    }
    if (table.lines.empty()) {
        throw ConfigError(path + ": no line entries");
    }
    return table;
}

LineStack build_stack(
    const HyperfineTable& table, const LadderScheme& base,
    const std::map<std::string, double>& gamma_extra_per_isotope) {
    base.validate();

    for (const auto& [isotope, gamma] : gamma_extra_per_isotope) {
        bool known = false;
        for (const HyperfineLine& line : table.lines) {
            known = known || line.isotope == isotope;
        }
        if (!known) {
            throw InvalidInput("gamma_extra names unknown isotope '" +
                               isotope + "'");
        }
        if (!(gamma >= 0.0)) {
            throw InvalidInput("gamma_extra must be >= 0");
        }
    }

    LineStack stack;
    stack.lines.reserve(table.lines.size());
    for (const HyperfineLine& line : table.lines) {
        StackLine out;
        out.scheme = base;
        out.scheme.weight = line.weight;
        out.scheme.detuning_offset =
            line.offset_mhz * constants::two_pi * 1e6;
        const auto it = gamma_extra_per_isotope.find(line.isotope);
        if (it != gamma_extra_per_isotope.end()) {
            out.scheme.gamma_extra = it->second;
        }
        out.abundance = line.abundance;
        out.mass = line.mass_u * constants::atomic_mass_unit;
        out.label = line.isotope + " " + line.transition;
        stack.lines.push_back(std::move(out));
    }
    stack.validate();
    return stack;
}

}  // namespace eit
