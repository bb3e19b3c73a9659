#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "itecp/csv.hpp"
#include "itecp/errors.hpp"

using namespace itecp;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path((std::filesystem::temp_directory_path() / name).string()) {
        std::ofstream f(path);
        f << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("minimal csv without potential outcomes") {
    TempFile f("itecp_min.csv",
               "x1,x2,w,y\n"
               "0.1,0.2,0,1.5\n"
               "0.3,0.4,1,2.5\n"
               "0.5,0.6,0,-1\n");
    const auto ds = load_csv(f.path, PropensitySpec::constant_value(0.4));
    CHECK(ds.n() == 3);
    CHECK(ds.d() == 2);
    CHECK(!ds.has_potential_outcomes());
    CHECK(ds.w[1] == 1);
    CHECK(ds.y[2] == -1.0);
    CHECK(ds.pi[0] == 0.4);
}

TEST_CASE("beta24 propensity spec fills pi from x1") {
    TempFile f("itecp_beta.csv",
               "x1,x2,w,y\n"
               "0.5,0.2,0,1\n");
    const auto ds = load_csv(f.path, PropensitySpec::beta24());
    CHECK(ds.pi[0] == doctest::Approx(0.453125).epsilon(1e-14));
}

TEST_CASE("consistency violations name the row") {
    TempFile f("itecp_bad.csv",
               "x1,x2,w,y,y0,y1\n"
               "0.1,0.2,0,5,5,6\n"
               "0.3,0.4,1,7,1,2\n");
    CHECK_THROWS_WITH_AS(load_csv(f.path, PropensitySpec::constant_value(0.5)),
                         doctest::Contains("row 2"), DataError);
}

TEST_CASE("empty file and missing columns are rejected") {
    TempFile empty("itecp_empty.csv", "");
    CHECK_THROWS_WITH_AS(load_csv(empty.path, PropensitySpec::constant_value(0.5)),
                         doctest::Contains("no data rows"), DataError);

    TempFile header_only("itecp_header.csv", "x1,x2,w,y\n");
    CHECK_THROWS_WITH_AS(load_csv(header_only.path, PropensitySpec::constant_value(0.5)),
                         doctest::Contains("no data rows"), DataError);

    TempFile no_y("itecp_noy.csv", "x1,x2,w\n0.1,0.2,0\n");
    CHECK_THROWS_WITH_AS(load_csv(no_y.path, PropensitySpec::constant_value(0.5)),
                         doctest::Contains("mandatory column 'y'"), DataError);

    TempFile bad_w("itecp_badw.csv", "x1,w,y\n0.1,2,3\n");
    CHECK_THROWS_WITH_AS(load_csv(bad_w.path, PropensitySpec::constant_value(0.5)),
                         doctest::Contains("non-binary w"), DataError);

    TempFile bad_num("itecp_badnum.csv", "x1,w,y\n0.1,0,abc\n");
    CHECK_THROWS_WITH_AS(load_csv(bad_num.path, PropensitySpec::constant_value(0.5)),
                         doctest::Contains("column y"), DataError);

    TempFile extra("itecp_extra.csv", "x1,w,y,zzz\n0.1,0,1,2\n");
    CHECK_THROWS_WITH_AS(load_csv(extra.path, PropensitySpec::constant_value(0.5)),
                         doctest::Contains("unexpected column"), DataError);
}

TEST_CASE("pi column is required for the column propensity choice") {
    TempFile f("itecp_nopi.csv", "x1,w,y\n0.1,0,1\n");
    CHECK_THROWS_WITH_AS(load_csv(f.path, PropensitySpec::column()),
                         doctest::Contains("pi column"), DataError);
}

TEST_CASE("save and load round-trip bit-exactly") {
    SynthConfig cfg;
    cfg.n = 60;
    cfg.d = 3;
    cfg.seed = 11;
    cfg.setup = Setup::B;
    const auto ds = generate_synthetic(cfg);
    const auto path =
        (std::filesystem::temp_directory_path() / "itecp_roundtrip.csv").string();
    save_csv(ds, path);
    const auto back = load_csv(path, PropensitySpec::column());
    std::remove(path.c_str());

    REQUIRE(back.n() == ds.n());
    REQUIRE(back.d() == ds.d());
    CHECK(back.x.data() == ds.x.data());
    CHECK(back.w == ds.w);
    CHECK(back.y == ds.y);
    CHECK(back.pi == ds.pi);
    CHECK(*back.y0 == *ds.y0);
    CHECK(*back.y1 == *ds.y1);
    CHECK(*back.tau_true == *ds.tau_true);
}
