// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/filter_bank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dtfuse {

namespace {

Taps place(const std::vector<double>& f, int offset, double scale) {
    Taps t{};
    for (std::size_t i = 0; i < f.size(); ++i) t[offset + i] = static_cast<float>(f[i] * scale);
    return t;
}

FilterBank make_default() {
    const double s = std::numbers::sqrt2;
    // Near-symmetric biorthogonal 5/7 filters, unit DC gain before scaling.
    const std::vector<double> h0{-0.05, 0.25, 0.6, 0.25, -0.05};
    const std::vector<double> h1{0.010714285714285713, -0.05357142857142857, -0.26071428571428573,
                                 0.6071428571428571,   -0.26071428571428573, -0.05357142857142857,
                                 0.010714285714285713};
    const std::vector<double> g0{-0.010714285714285713, -0.05357142857142857, 0.26071428571428573,
                                 0.6071428571428571,    0.26071428571428573,  -0.05357142857142857,
                                 -0.010714285714285713};
    const std::vector<double> g1{-0.05, -0.25, 0.6, -0.25, -0.05};
    // Orthonormal 10-tap quarter-shift pair.
    const std::vector<double> q0{0.051130405283831656,  -0.013975370246888838, -0.10983605166597087,
                                 0.26383956105893763,   0.7666284677930372,    0.5636557101270515,
                                 0.0008736226952170968, -0.1002312195074762,   -0.0016896812725281543,
                                 -0.006181881892116438};
    const std::vector<double> q1{-0.006181881892116438, 0.0016896812725281543, -0.1002312195074762,
                                 -0.0008736226952170968, 0.5636557101270515,   -0.7666284677930372,
                                 0.26383956105893763,    0.10983605166597087,  -0.013975370246888838,
                                 -0.051130405283831656};
    FilterBank b;
    b.level1_analysis_a = {place(h0, 4, s), place(h1, 4, s)};
    b.level1_synthesis_a = {place(g0, 3, s), place(g1, 5, s)};
    b.level1_analysis_b = {place(h0, 5, s), place(h1, 5, s)};
    b.level1_synthesis_b = {place(g0, 4, s), place(g1, 6, s)};
    b.qshift_analysis_a = {place(q0, 1, 1.0), place(q1, 1, 1.0)};
    b.qshift_synthesis_a = b.qshift_analysis_a;
    return b;
}

// Periodic stride-2 analysis followed by the transposed synthesis, in double.
std::vector<double> periodic_round_trip(const std::vector<double>& x, const FilterPair& a, const FilterPair& s) {
    const std::size_t n = x.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t k = 0; k < n / 2; ++k) {
        double lo = 0, hi = 0;
        for (std::size_t j = 0; j < kTaps; ++j) {
            const double v = x[(2 * k + j + n - 6) % n];
            lo += double(a.lp[j]) * v;
            hi += double(a.hp[j]) * v;
        }
        for (std::size_t j = 0; j < kTaps; ++j)
            y[(2 * k + j + n - 6) % n] += lo * double(s.lp[j]) + hi * double(s.hp[j]);
    }
    return y;
}

const std::vector<std::string>& bank_keys() {
    static const std::vector<std::string> keys{
        "level1.a.analysis.lp",  "level1.a.analysis.hp",  "level1.a.synthesis.lp", "level1.a.synthesis.hp",
        "level1.b.analysis.lp",  "level1.b.analysis.hp",  "level1.b.synthesis.lp", "level1.b.synthesis.hp",
        "qshift.analysis.lp",    "qshift.analysis.hp",    "qshift.synthesis.lp",   "qshift.synthesis.hp"};
    return keys;
}

Taps* slot(FilterBank& b, const std::string& key) {
    Taps* slots[] = {&b.level1_analysis_a.lp,  &b.level1_analysis_a.hp,  &b.level1_synthesis_a.lp,
                     &b.level1_synthesis_a.hp, &b.level1_analysis_b.lp,  &b.level1_analysis_b.hp,
                     &b.level1_synthesis_b.lp, &b.level1_synthesis_b.hp, &b.qshift_analysis_a.lp,
                     &b.qshift_analysis_a.hp,  &b.qshift_synthesis_a.lp, &b.qshift_synthesis_a.hp};
    const auto& keys = bank_keys();
    auto it = std::find(keys.begin(), keys.end(), key);
    return it == keys.end() ? nullptr : slots[it - keys.begin()];
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

Taps reversed(const Taps& t) {
    Taps r = t;
    std::reverse(r.begin(), r.end());
    return r;
}

FilterPair FilterBank::qshift_analysis(Tree t) const {
    if (t == Tree::A) return qshift_analysis_a;
    return {reversed(qshift_analysis_a.lp), reversed(qshift_analysis_a.hp)};
}

FilterPair FilterBank::qshift_synthesis(Tree t) const {
    if (t == Tree::A) return qshift_synthesis_a;
    return {reversed(qshift_synthesis_a.lp), reversed(qshift_synthesis_a.hp)};
}

FilterPair FilterBank::analysis(int level, Tree t) const {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    return level == 1 ? level1_analysis(t) : qshift_analysis(t);
}

FilterPair FilterBank::synthesis(int level, Tree t) const {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    return level == 1 ? level1_synthesis(t) : qshift_synthesis(t);
}

const FilterBank& default_filter_bank() {
    static const FilterBank bank = make_default();
    return bank;
}

double pair_reconstruction_error(const FilterPair& analysis, const FilterPair& synthesis) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0;
    for (std::size_t n : {24u, 32u, 50u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = u(rng);
        const auto y = periodic_round_trip(x, analysis, synthesis);
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(y[i] - x[i]));
    }
    return worst;
}

void validate_filter_bank(const FilterBank& bank) {
    auto sum = [](const Taps& t) {
        double s = 0;
        for (float v : t) s += v;
        return s;
    };
    const FilterPair* analysis[] = {&bank.level1_analysis_a, &bank.level1_analysis_b, &bank.qshift_analysis_a};
    const char* names[] = {"level1.a", "level1.b", "qshift"};
    for (int i = 0; i < 3; ++i) {
        if (std::abs(sum(analysis[i]->lp) - std::numbers::sqrt2) > 1e-6)
            throw std::invalid_argument(std::string(names[i]) + " analysis lowpass does not sum to sqrt(2)");
        if (std::abs(sum(analysis[i]->hp)) > 1e-6)
            throw std::invalid_argument(std::string(names[i]) + " analysis highpass does not sum to 0");
    }
    const std::pair<FilterPair, FilterPair> pairs[] = {
        {bank.level1_analysis_a, bank.level1_synthesis_a},
        {bank.level1_analysis_b, bank.level1_synthesis_b},
        {bank.qshift_analysis(Tree::A), bank.qshift_synthesis(Tree::A)},
        {bank.qshift_analysis(Tree::B), bank.qshift_synthesis(Tree::B)}};
    const char* pair_names[] = {"level1.a", "level1.b", "qshift.a", "qshift.b"};
    for (int i = 0; i < 4; ++i)
        if (pair_reconstruction_error(pairs[i].first, pairs[i].second) > 1e-6)
            throw std::invalid_argument(std::string(pair_names[i]) + " pair is not perfectly reconstructing");
}

FilterBank parse_filter_bank(const std::string& text) {
    FilterBank bank = default_filter_bank();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("filter bank line " + std::to_string(lineno) + ": expected key = taps");
        const std::string key = trim(line.substr(0, eq));
        Taps* dst = slot(bank, key);
        if (!dst) throw std::invalid_argument("filter bank line " + std::to_string(lineno) + ": unknown key " + key);
        std::vector<float> vals;
        std::istringstream vs(line.substr(eq + 1));
        std::string tok;
        while (std::getline(vs, tok, ',')) {
            tok = trim(tok);
            try {
                std::size_t used = 0;
                vals.push_back(std::stof(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw std::invalid_argument("filter bank line " + std::to_string(lineno) + ": bad tap '" + tok + "'");
            }
        }
        if (vals.size() != kTaps)
            throw std::invalid_argument("filter bank line " + std::to_string(lineno) + ": expected exactly 12 taps");
        std::copy(vals.begin(), vals.end(), dst->begin());
    }
    validate_filter_bank(bank);
    return bank;
}

FilterBank load_filter_bank(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open filter bank " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_filter_bank(ss.str());
}

std::string format_filter_bank(const FilterBank& bank) {
    FilterBank copy = bank;
    std::ostringstream out;
    out.precision(9);
    for (const auto& key : bank_keys()) {
        const Taps* t = slot(copy, key);
        out << key << " =";
        for (std::size_t i = 0; i < kTaps; ++i) out << (i ? ", " : " ") << (*t)[i];
        out << '\n';
    }
    return out.str();
}

}  // namespace dtfuse
