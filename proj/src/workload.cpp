#include "mallsim/workload.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mallsim::workload {

using nlohmann::json;

void WorkloadSpec::validate() const {
    if (job_count < 1) throw InvalidSpec("job_count must be >= 1");
    if (!(mean_interarrival > 0.0)) throw InvalidSpec("mean_interarrival must be positive");
    if (inhibit_window < 0) throw InvalidSpec("inhibit_window must be >= 0");
    double sum = 0.0;
    for (const auto& [t, w] : type_weights) {
        if (!(w >= 0.0)) throw InvalidSpec("type weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidSpec("type weights must sum to 1");
}

namespace {

// Uniform in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

JobType draw_type(const std::map<JobType, double>& weights, std::mt19937_64& rng) {
    const double u = unit_uniform(rng);
    double acc = 0.0;
    JobType last = JobType::Small;
    for (JobType t : kJobTypes) {
        auto it = weights.find(t);
        if (it == weights.end() || it->second <= 0.0) continue;
        acc += it->second;
        last = t;
        if (u < acc) return t;
    }
    return last;
}

const scalability::ScalabilityProfile& profile_for(const scalability::ProfileSet& profiles,
                                                   JobType t) {
    auto it = profiles.find(t);
    if (it == profiles.end())
        throw InvalidSpec("no scalability profile for " + std::string(to_string(t)));
    return it->second;
}

}  // namespace

Workload generate(const WorkloadSpec& spec, const scalability::ProfileSet& profiles) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    Workload w;
    w.jobs.reserve(spec.job_count);
    Seconds clock = 0.0;
    for (int i = 0; i < spec.job_count; ++i) {
        if (i > 0) clock += -spec.mean_interarrival * std::log1p(-unit_uniform(rng));
        const JobType t = draw_type(spec.type_weights, rng);
        const auto& prof = profile_for(profiles, t);
        JobSpec j;
        j.id = i;
        j.jtype = t;
        j.iterations = job_type_info(t).iterations;
        j.max_nodes = scalability::static_max_nodes(prof);
        j.min_nodes = spec.malleable ? prof.base_nodes() : j.max_nodes;
        j.malleable = spec.malleable;
        j.submit_time = clock;
        j.inhibit_window = spec.inhibit_window;
        w.jobs.push_back(j);
    }
    return w;
}

Workload make_static(const Workload& w, const scalability::ProfileSet& profiles) {
    Workload out = w;
    for (auto& j : out.jobs) {
        const int size = scalability::static_max_nodes(profile_for(profiles, j.jtype));
        j.min_nodes = j.max_nodes = size;
        j.malleable = false;
    }
    return out;
}

std::string to_json(const Workload& w) {
    json jobs = json::array();
    for (const auto& j : w.jobs) {
        jobs.push_back({{"id", j.id},
                        {"jtype", std::string(to_string(j.jtype))},
                        {"iterations", j.iterations},
                        {"min_nodes", j.min_nodes},
                        {"max_nodes", j.max_nodes},
                        {"malleable", j.malleable},
                        {"submit_time", j.submit_time}});
    }
    return json{{"jobs", jobs}}.dump(2) + "\n";
}

Workload from_json(const std::string& text, int inhibit_window) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw MalformedFile(std::string("workload: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("jobs") || !doc["jobs"].is_array())
        throw MalformedFile("workload: top level must be an object with a 'jobs' array");
    const auto& arr = doc["jobs"];
    if (arr.empty()) throw MalformedFile("workload: 'jobs' is empty");

    static const std::set<std::string> kFields{"id",        "jtype",     "iterations", "min_nodes",
                                               "max_nodes", "malleable", "submit_time"};
    Workload w;
    std::set<JobId> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& rec = arr[i];
        auto fail = [i](const std::string& field, const std::string& what) {
            throw MalformedFile("workload: jobs[" + std::to_string(i) + "]" +
                                (field.empty() ? "" : "." + field) + ": " + what);
        };
        if (!rec.is_object()) fail("", "not an object");
        for (const auto& [key, _] : rec.items())
            if (!kFields.contains(key)) fail(key, "unknown field");
        for (const auto& key : kFields)
            if (!rec.contains(key)) fail(key, "missing");

        JobSpec j;
        try {
            if (!rec["id"].is_number_integer()) fail("id", "must be an integer");
            j.id = rec["id"].get<JobId>();
            if (!rec["jtype"].is_string()) fail("jtype", "must be a string");
            try {
                j.jtype = job_type_from_string(rec["jtype"].get<std::string>());
            } catch (const Error& e) {
                fail("jtype", e.what());
            }
            for (const char* key : {"iterations", "min_nodes", "max_nodes"})
                if (!rec[key].is_number_integer()) fail(key, "must be an integer");
            j.iterations = rec["iterations"].get<int>();
            j.min_nodes = rec["min_nodes"].get<int>();
            j.max_nodes = rec["max_nodes"].get<int>();
            if (!rec["malleable"].is_boolean()) fail("malleable", "must be a boolean");
            j.malleable = rec["malleable"].get<bool>();
            if (!rec["submit_time"].is_number()) fail("submit_time", "must be a number");
            j.submit_time = rec["submit_time"].get<double>();
        } catch (const json::exception& e) {
            fail("", e.what());
        }
        j.inhibit_window = inhibit_window;

        if (!(j.submit_time >= 0.0)) fail("submit_time", "must be non-negative");
        if (j.iterations < 1) fail("iterations", "must be >= 1");
        if (j.min_nodes < 1) fail("min_nodes", "must be >= 1");
        if (j.max_nodes < j.min_nodes) fail("max_nodes", "must be >= min_nodes");
        if (!seen.insert(j.id).second) fail("id", "duplicate id " + std::to_string(j.id));
        if (!w.jobs.empty() && j.submit_time < w.jobs.back().submit_time)
            fail("submit_time", "submit times must be non-decreasing");
        w.jobs.push_back(j);
    }
    return w;
}

void save(const Workload& w, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write workload file " + path.string());
    out << to_json(w);
    if (!out) throw Error("failed writing workload file " + path.string());
}

Workload load(const std::filesystem::path& path, int inhibit_window) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedFile("cannot open workload file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), inhibit_window);
}

}  // namespace mallsim::workload
