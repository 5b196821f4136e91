#pragma once
// Field persistence.  CIFLD1: one JSON header line, then nmodes binary
// records of 3 x int32 (k, little-endian) followed by ncomponents x 2 x
// float64 (re, im).  Triple states are directories of CIFLD1 files plus a
// JSON manifest.

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ciflow/step.hpp"

namespace ciflow {

static_assert(std::endian::native == std::endian::little,
              "CIFLD1 writer assumes a little-endian host");

using Json = nlohmann::json;

inline Rank rank_from_name(const std::string& s) {
    if (s == "scalar") return Rank::scalar;
    if (s == "vector3") return Rank::vector3;
    if (s == "tensor3x3-symmetric") return Rank::tensor3x3_symmetric;
    if (s == "tensor3x3") return Rank::tensor3x3;
    fail(Errc::format_error, "unknown rank name: " + s);
}

inline void write_field(const SpectralField& f, const std::string& path,
                        std::optional<double> time = std::nullopt) {
    Json header;
    header["format"] = "CIFLD1";
    header["rank"] = rank_name(f.rank());
    header["ncomponents"] = f.ncomp();
    header["nmodes"] = f.nmodes();
    if (time) header["time"] = *time;
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_error, "cannot open for writing: " + path);
    out << header.dump() << "\n";
    const int nc = f.ncomp();
    std::vector<char> rec(size_t(12 + 16 * nc));
    for (size_t i = 0; i < f.nmodes(); ++i) {
        IVec3 k = f.mode(i);
        std::memcpy(rec.data(), k.data(), 12);
        for (int c = 0; c < nc; ++c) {
            double re = f.row(i)[c].real(), im = f.row(i)[c].imag();
            std::memcpy(rec.data() + 12 + 16 * c, &re, 8);
            std::memcpy(rec.data() + 12 + 16 * c + 8, &im, 8);
        }
        out.write(rec.data(), std::streamsize(rec.size()));
    }
    if (!out) fail(Errc::io_error, "write failed: " + path);
}

struct LoadedField {
    SpectralField field;
    std::optional<double> time;
};

inline LoadedField read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) fail(Errc::format_error, "missing CIFLD1 header: " + path);
    Json header = Json::parse(line, nullptr, false);
    if (header.is_discarded()) fail(Errc::format_error, "malformed CIFLD1 header: " + path);
    if (!header.contains("format") || header["format"] != "CIFLD1")
        fail(Errc::format_error, "unknown field format in " + path);
    Rank rank = rank_from_name(header.at("rank").get<std::string>());
    int nc = header.at("ncomponents").get<int>();
    if (nc != component_count(rank)) fail(Errc::format_error, "component count mismatch in " + path);
    size_t nmodes = header.at("nmodes").get<size_t>();
    LoadedField out;
    if (header.contains("time")) out.time = header["time"].get<double>();
    std::vector<ModeKey> keys;
    std::vector<cplx> coef;
    keys.reserve(nmodes);
    coef.reserve(nmodes * size_t(nc));
    std::vector<char> rec(size_t(12 + 16 * nc));
    for (size_t i = 0; i < nmodes; ++i) {
        in.read(rec.data(), std::streamsize(rec.size()));
        if (!in) fail(Errc::format_error, "truncated CIFLD1 record in " + path);
        IVec3 k;
        std::memcpy(k.data(), rec.data(), 12);
        keys.push_back(pack_key(k));
        for (int c = 0; c < nc; ++c) {
            double re, im;
            std::memcpy(&re, rec.data() + 12 + 16 * c, 8);
            std::memcpy(&im, rec.data() + 12 + 16 * c + 8, 8);
            coef.emplace_back(re, im);
        }
    }
    // records are written sorted, but tolerate arbitrary order
    SpectralField f(rank);
    bool sorted = std::is_sorted(keys.begin(), keys.end());
    if (sorted) {
        f = SpectralField::from_rows(rank, std::move(keys), std::move(coef));
    } else {
        for (size_t i = 0; i < keys.size(); ++i) {
            IVec3 k = unpack_key(keys[i]);
            for (int c = 0; c < nc; ++c) f.add(k, c, coef[i * size_t(nc) + size_t(c)]);
        }
        f.normalize();
    }
    out.field = std::move(f);
    return out;
}

// ---------------------------------------------------------------------------
// TimeField and TripleState directories

inline void write_time_field(const TimeField& tf, const std::string& dir, const std::string& stem,
                             Json& manifest_entry) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    Json files = Json::array();
    for (size_t i = 0; i < tf.nsamples(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%04zu.cifld", stem.c_str(), i);
        write_field(tf.at(i), dir + "/" + name, tf.time(i));
        files.push_back(name);
    }
    manifest_entry["files"] = files;
    if (tf.has_ddt()) {
        Json dfiles = Json::array();
        for (size_t i = 0; i < tf.nsamples(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "%s_ddt_%04zu.cifld", stem.c_str(), i);
            write_field(tf.ddt_at(i), dir + "/" + name, tf.time(i));
            dfiles.push_back(name);
        }
        manifest_entry["ddt_files"] = dfiles;
    }
}

inline TimeField read_time_field(const std::string& dir, const Json& manifest_entry,
                                 const std::vector<double>& times) {
    std::vector<SpectralField> fields;
    for (const auto& name : manifest_entry.at("files"))
        fields.push_back(read_field(dir + "/" + name.get<std::string>()).field);
    TimeField tf(times, std::move(fields));
    if (manifest_entry.contains("ddt_files")) {
        std::vector<SpectralField> ddt;
        for (const auto& name : manifest_entry.at("ddt_files"))
            ddt.push_back(read_field(dir + "/" + name.get<std::string>()).field);
        tf.set_ddt(std::move(ddt));
    }
    return tf;
}

inline Json params_to_json(const ParamSet& p) {
    Json j;
    j["lam"] = p.lam;
    j["sigma_num"] = p.sigma.num;
    j["sigma_den"] = p.sigma.den;
    j["r"] = p.r;
    j["mu"] = p.mu;
    j["beta"] = p.beta;
    j["theta"] = p.theta;
    j["nu"] = p.nu;
    j["s"] = p.s;
    return j;
}

inline ParamSet params_from_json(const Json& j) {
    ParamSet p;
    p.lam = j.at("lam").get<int64_t>();
    p.sigma = Rational(j.at("sigma_num").get<int64_t>(), j.at("sigma_den").get<int64_t>());
    p.r = j.at("r").get<int64_t>();
    p.mu = j.at("mu").get<double>();
    p.beta = j.value("beta", 15.0);
    p.theta = j.value("theta", 1.25);
    p.nu = j.value("nu", 1.0);
    p.s = j.value("s", 1.5);
    return p;
}

inline void save_triple(const TripleState& st, const std::string& dir, const Json& extra = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    Json manifest;
    manifest["format"] = "CITRIPLE1";
    manifest["times"] = st.v.times();
    manifest["params"] = params_to_json(st.params);
    Json v_entry, p_entry, R_entry;
    write_time_field(st.v, dir, "v", v_entry);
    write_time_field(st.p, dir, "p", p_entry);
    write_time_field(st.R, dir, "R", R_entry);
    manifest["v"] = v_entry;
    manifest["p"] = p_entry;
    manifest["R"] = R_entry;
    if (!extra.is_null() && !extra.empty()) manifest["report"] = extra;
    std::ofstream out(dir + "/manifest.json");
    if (!out) fail(Errc::io_error, "cannot write manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

inline TripleState load_triple(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) fail(Errc::io_error, "cannot open manifest in " + dir);
    Json manifest = Json::parse(in, nullptr, false);
    if (manifest.is_discarded()) fail(Errc::format_error, "malformed manifest in " + dir);
    if (!manifest.contains("format") || manifest["format"] != "CITRIPLE1")
        fail(Errc::format_error, "unknown triple format in " + dir);
    TripleState st;
    std::vector<double> times = manifest.at("times").get<std::vector<double>>();
    st.params = params_from_json(manifest.at("params"));
    st.v = read_time_field(dir, manifest.at("v"), times);
    st.p = read_time_field(dir, manifest.at("p"), times);
    st.R = read_time_field(dir, manifest.at("R"), times);
    return st;
}

// Disk sink for streamed steps.
struct DiskSink : StepSink {
    std::string dir;
    Json v_files = Json::array(), dv_files = Json::array(), p_files = Json::array(),
         R_files = Json::array();
    std::vector<double> times;

    explicit DiskSink(std::string d) : dir(std::move(d)) {
        std::filesystem::create_directories(dir);
    }
    void emit(size_t i, double t, SpectralField v1, SpectralField v1_ddt, SpectralField p1,
              SpectralField R1) override {
        char name[64];
        std::snprintf(name, sizeof(name), "v_%04zu.cifld", i);
        write_field(v1, dir + "/" + name, t);
        v_files.push_back(name);
        std::snprintf(name, sizeof(name), "v_ddt_%04zu.cifld", i);
        write_field(v1_ddt, dir + "/" + name, t);
        dv_files.push_back(name);
        std::snprintf(name, sizeof(name), "p_%04zu.cifld", i);
        write_field(p1, dir + "/" + name, t);
        p_files.push_back(name);
        std::snprintf(name, sizeof(name), "R_%04zu.cifld", i);
        write_field(R1, dir + "/" + name, t);
        R_files.push_back(name);
        times.push_back(t);
    }
    void finish(const ParamSet& prm, const Json& report) {
        Json manifest;
        manifest["format"] = "CITRIPLE1";
        manifest["times"] = times;
        manifest["params"] = params_to_json(prm);
        manifest["v"] = Json{{"files", v_files}, {"ddt_files", dv_files}};
        manifest["p"] = Json{{"files", p_files}};
        manifest["R"] = Json{{"files", R_files}};
        if (!report.is_null() && !report.empty()) manifest["report"] = report;
        std::ofstream out(dir + "/manifest.json");
        if (!out) fail(Errc::io_error, "cannot write manifest in " + dir);
        out << manifest.dump(2) << "\n";
    }
};

}  // namespace ciflow
