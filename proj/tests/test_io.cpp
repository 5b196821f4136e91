#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "ciflow/config.hpp"
#include "ciflow/io.hpp"
#include "ciflow/rng.hpp"

using namespace ciflow;
namespace fs = std::filesystem;

namespace {
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ciflow_test_" + std::to_string(Rng(uint64_t(
                                                std::chrono::steady_clock::now().time_since_epoch().count())).next()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};
}  // namespace

TEST_CASE("CIFLD1 round-trip preserves fields bit for bit") {
    TempDir tmp;
    Rng rng(77);
    for (Rank rank : {Rank::scalar, Rank::vector3, Rank::tensor3x3_symmetric, Rank::tensor3x3}) {
        SpectralField f = random_real_field(rank, 3, rng);
        std::string path = (tmp.path / "field.cifld").string();
        write_field(f, path, 0.25);
        LoadedField back = read_field(path);
        REQUIRE(back.field.rank() == rank);
        REQUIRE(back.field == f);
        REQUIRE(back.time.has_value());
        REQUIRE(*back.time == 0.25);
    }
}

TEST_CASE("write is deterministic byte for byte") {
    TempDir tmp;
    Rng rng(78);
    SpectralField f = random_real_field(Rank::vector3, 4, rng);
    std::string p1 = (tmp.path / "a.cifld").string(), p2 = (tmp.path / "b.cifld").string();
    write_field(f, p1);
    write_field(f, p2);
    std::ifstream a(p1, std::ios::binary), b(p2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    REQUIRE(sa == sb);
}

TEST_CASE("unknown format strings are rejected") {
    TempDir tmp;
    std::string path = (tmp.path / "bad.cifld").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << R"({"format":"NOTCIFLD","rank":"scalar","ncomponents":1,"nmodes":0})" << "\n";
    }
    REQUIRE_THROWS_AS(read_field(path), Error);
    try {
        read_field(path);
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::format_error);
    }
}

TEST_CASE("triple state directory round-trip") {
    TempDir tmp;
    Rng rng(79);
    std::vector<double> times{0.0, 0.5, 1.0};
    std::vector<SpectralField> vs, ps, Rs, dvs;
    for (size_t i = 0; i < times.size(); ++i) {
        vs.push_back(leray_project(random_real_field(Rank::vector3, 2, rng)));
        dvs.push_back(leray_project(random_real_field(Rank::vector3, 2, rng)));
        ps.push_back(remove_mean(random_real_field(Rank::scalar, 2, rng)));
        auto [tf, tr] = remove_trace(random_real_field(Rank::tensor3x3_symmetric, 2, rng));
        Rs.push_back(tf);
    }
    TripleState st;
    st.params.lam = 40;
    st.params.sigma = Rational(1, 8);
    st.params.r = 2;
    st.params.mu = 64.0;
    st.v = TimeField(times, vs);
    st.v.set_ddt(dvs);
    st.p = TimeField(times, ps);
    st.R = TimeField(times, Rs);
    std::string dir = (tmp.path / "triple").string();
    save_triple(st, dir);
    TripleState back = load_triple(dir);
    REQUIRE(back.v.nsamples() == 3);
    REQUIRE(back.params.lam == 40);
    REQUIRE(back.params.sigma.num == 1);
    for (size_t i = 0; i < 3; ++i) {
        REQUIRE(back.v.at(i) == st.v.at(i));
        REQUIRE(back.v.ddt_at(i) == st.v.ddt_at(i));
        REQUIRE(back.p.at(i) == st.p.at(i));
        REQUIRE(back.R.at(i) == st.R.at(i));
    }
}

TEST_CASE("config validation rejects unknown keys") {
    Json cfg;
    cfg["threads"] = 2;
    cfg["tol"] = 1e-7;
    validate_config(cfg, {"beta"}, "params");  // fine
    cfg["bogus_key"] = 1;
    REQUIRE_THROWS_AS(validate_config(cfg, {"beta"}, "params"), Error);
}

TEST_CASE("config hash is stable and key-order independent") {
    Json a;
    a["threads"] = 4;
    a["tol"] = 0.5;
    Json b;
    b["tol"] = 0.5;
    b["threads"] = 4;
    REQUIRE(config_hash(a) == config_hash(b));
    b["threads"] = 5;
    REQUIRE(config_hash(a) != config_hash(b));
    REQUIRE(config_hash_hex(a).size() == 16);
}
