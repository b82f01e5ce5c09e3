#include "mallsim/scalability.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace mallsim::scalability {

ScalabilityProfile::ScalabilityProfile(JobType jtype, int base_nodes, std::vector<Seconds> times)
    : jtype_(jtype), base_nodes_(base_nodes), times_(std::move(times)) {
    if (base_nodes_ < 1) throw Error("profile base_nodes must be >= 1");
    if (times_.empty()) throw Error("profile needs at least the base sample");
    for (Seconds t : times_)
        if (!(t > 0.0)) throw Error("profile iteration times must be positive");
}

Seconds iteration_time(const ScalabilityProfile& profile, int nodes) {
    if (nodes < profile.base_nodes())
        throw BelowMinimum(std::string(to_string(profile.jtype())) + " needs at least " +
                           std::to_string(profile.base_nodes()) + " nodes, got " +
                           std::to_string(nodes));
    const auto idx = std::min<std::size_t>(nodes - profile.base_nodes(), profile.times().size() - 1);
    return profile.times()[idx];
}

double speedup(const ScalabilityProfile& profile, int nodes) {
    const Seconds t = iteration_time(profile, nodes);
    return profile.times().front() / t;
}

double efficiency(const ScalabilityProfile& profile, int nodes) {
    const double s = speedup(profile, nodes);
    return s / (double(nodes) / double(profile.base_nodes()));
}

NormalizedSeries normalized_efficiency(std::span<const double> series) {
    if (series.empty()) throw Error("normalized_efficiency: empty series");
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    NormalizedSeries out;
    out.values.resize(series.size(), 0.0);
    if (*hi == *lo) {
        out.degenerate = true;
        return out;
    }
    const double span = *hi - *lo;
    for (std::size_t i = 0; i < series.size(); ++i) out.values[i] = (series[i] - *lo) / span;
    return out;
}

std::vector<double> efficiency_series(const ScalabilityProfile& profile) {
    std::vector<double> out;
    for (int n = profile.base_nodes(); n <= profile.last_sampled_nodes(); ++n)
        out.push_back(efficiency(profile, n));
    return out;
}

int static_max_nodes(const ScalabilityProfile& profile) {
    const double base = efficiency(profile, profile.base_nodes());
    int best = profile.base_nodes();
    for (int n = profile.base_nodes() + 1; n <= profile.last_sampled_nodes(); ++n) {
        if (efficiency(profile, n) < base) break;
        best = n;
    }
    return best;
}

const ProfileSet& default_profiles() {
    static const ProfileSet set = [] {
        ProfileSet s;
        s.emplace(JobType::Small,
                  ScalabilityProfile(JobType::Small, 1,
                                     {8.90, 3.40, 2.20, 1.47, 1.31, 1.20, 1.14, 1.09, 1.06, 1.01,
                                      0.99, 1.08}));
        s.emplace(JobType::Medium,
                  ScalabilityProfile(JobType::Medium, 2,
                                     {8.70, 5.30, 3.80, 3.14, 2.84, 2.54, 2.28, 2.19, 2.09, 2.23,
                                      2.24}));
        s.emplace(JobType::Large,
                  ScalabilityProfile(JobType::Large, 4,
                                     {12.20, 6.10, 5.40, 4.80, 4.65, 4.44, 4.39, 4.19, 4.18}));
        return s;
    }();
    return set;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
bool parse_number(const std::string& s, T& out) {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && p == end;
}

}  // namespace

ProfileSet parse_profiles(const std::string& text) {
    std::map<JobType, std::map<int, Seconds>> samples;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(body);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(trim(f));
        auto fail = [lineno](const std::string& what) {
            throw Error("profile table line " + std::to_string(lineno) + ": " + what);
        };
        if (fields.size() != 3) fail("expected jtype,nodes,seconds");
        if (fields[0] == "jtype") continue;
        JobType t;
        try {
            t = job_type_from_string(fields[0]);
        } catch (const Error& e) {
            fail(e.what());
        }
        int nodes = 0;
        double secs = 0.0;
        if (!parse_number(fields[1], nodes) || nodes < 1) fail("bad node count '" + fields[1] + "'");
        if (!parse_number(fields[2], secs) || !(secs > 0.0)) fail("bad seconds '" + fields[2] + "'");
        if (!samples[t].emplace(nodes, secs).second)
            fail("duplicate sample for " + fields[0] + " at " + fields[1] + " nodes");
    }
    if (samples.empty()) throw Error("profile table has no samples");
    ProfileSet out;
    for (const auto& [t, by_nodes] : samples) {
        const int base = by_nodes.begin()->first;
        std::vector<Seconds> times;
        int expect = base;
        for (const auto& [n, secs] : by_nodes) {
            if (n != expect)
                throw Error("profile table: " + std::string(to_string(t)) +
                            " samples are not contiguous at " + std::to_string(expect) + " nodes");
            times.push_back(secs);
            ++expect;
        }
        out.emplace(t, ScalabilityProfile(t, base, std::move(times)));
    }
    return out;
}

ProfileSet load_profiles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open profile table " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_profiles(buf.str());
}

}  // namespace mallsim::scalability
