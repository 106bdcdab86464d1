#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phasered/cli.hpp"
#include "phasered/csvio.hpp"

using namespace phasered;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("phasered_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("parse_config: defaults, overrides, unknown keys") {
    auto cfg = RunConfig::parse("model = hopf\na = 1\n# comment\n");
    cfg.resolve();
    CHECK(cfg.get_double("a") == 1.0);
    CHECK(cfg.get_double("b") == 1.0);   // documented default
    CHECK(cfg.get_double("c") == -1.0);
    CHECK(cfg.get_double("d") == 0.0);
    CHECK(cfg.provenance("a") == RunConfig::Provenance::File);
    CHECK(cfg.provenance("b") == RunConfig::Provenance::Default);

    auto bad = RunConfig::parse("model = hopf\nfoo = 1\n");
    CHECK_THROWS_WITH_AS(bad.resolve(), doctest::Contains("foo"), ConfigError);

    RunConfig missing;
    CHECK_THROWS_AS(missing.resolve(), ConfigError);

    auto rho_on_hopf = RunConfig::parse("model = hopf\nrho = 2\n");
    CHECK_THROWS_AS(rho_on_hopf.resolve(), ConfigError);
}

TEST_CASE("parse_config: flags override file values") {
    auto cfg = RunConfig::parse("model = hopf\na = 1\nout = from_file\n");
    cfg.set_flag("a", "2");
    cfg.resolve();
    CHECK(cfg.get_double("a") == 2.0);
    CHECK(cfg.provenance("a") == RunConfig::Provenance::Flag);
    CHECK(cfg.get("out") == "from_file");
}

TEST_CASE("parse_config: round-trip of the resolved config") {
    auto cfg = RunConfig::parse("model = sniper\neta = 1.5\ncommand = irc\n");
    cfg.resolve();
    auto cfg2 = RunConfig::parse(cfg.serialize());
    cfg2.resolve();
    CHECK(cfg.entries() == cfg2.entries());
}

TEST_CASE("parse_config: type mismatch") {
    auto cfg = RunConfig::parse("model = hopf\na = banana\n");
    CHECK_THROWS_AS(cfg.resolve(), ConfigError);
}

TEST_CASE("read_control_csv: formats and errors") {
    const std::string dir = temp_dir("control");
    {
        std::ofstream f(dir + "/empty.csv");
        f << "t,u1,u2\n";
    }
    auto z = read_control_csv(dir + "/empty.csv", 2);
    CHECK(z.kind() == ControlSignal::Kind::Zero);

    {
        std::ofstream f(dir + "/imp.csv");
        f << "#impulses\nt,dx1,dx2\n0,0,0.001\n1.5,0.002,0\n";
    }
    auto imp = read_control_csv(dir + "/imp.csv", 2);
    CHECK(imp.kind() == ControlSignal::Kind::Impulses);
    REQUIRE(imp.size() == 2);
    CHECK(imp.value(0)[1] == 0.001);

    {
        std::ofstream f(dir + "/pwc.csv");
        f << "t,u1,u2\n0,1,0\n2,0,0\n";
    }
    auto pwc = read_control_csv(dir + "/pwc.csv", 2);
    CHECK(pwc.kind() == ControlSignal::Kind::PiecewiseConstant);
    CHECK(pwc.eval(1.0)[0] == 1.0);

    {
        std::ofstream f(dir + "/bad_time.csv");
        f << "t,u1,u2\n1,0,0\n0.5,0,0\n";
    }
    CHECK_THROWS_AS(read_control_csv(dir + "/bad_time.csv", 2), ConfigError);
    {
        std::ofstream f(dir + "/bad_cols.csv");
        f << "t,u1\n0,1\n";
    }
    CHECK_THROWS_AS(read_control_csv(dir + "/bad_cols.csv", 2), ConfigError);
}

TEST_CASE("run: irc command writes the Hopf IRC") {
    const std::string dir = temp_dir("irc_run");
    auto cfg = RunConfig::parse("model = hopf\ncommand = irc\nout = " + dir + "\n");
    std::string err;
    const int rc = run(std::move(cfg), &err);
    REQUIRE(rc == 0);

    std::ifstream csv(dir + "/irc.csv");
    REQUIRE(csv.good());
    std::string header, row0;
    std::getline(csv, header);
    std::getline(csv, row0);
    CHECK(header == "theta,c1,c2");
    double th, c1, c2;
    REQUIRE(std::sscanf(row0.c_str(), "%lf,%lf,%lf", &th, &c1, &c2) == 3);
    CHECK(th == 0.0);
    // unit magnitude; the sign follows the first-positive eigenvector rule
    CHECK(std::abs(std::abs(c1) - 1.0) < 1e-5);
    CHECK(std::abs(c2) < 1e-5);

    const std::string manifest = read_file(dir + "/manifest.txt");
    CHECK(manifest.find("k = -2") != std::string::npos);
    CHECK(manifest.find("prc_method = ") != std::string::npos);
    CHECK(std::filesystem::exists(dir + "/irc.svg"));
    CHECK(std::filesystem::exists(dir + "/orbit.csv"));
}

TEST_CASE("run: byte-identical CSV bodies on identical configs") {
    const std::string d1 = temp_dir("repro1"), d2 = temp_dir("repro2");
    for (const std::string& d : {d1, d2}) {
        auto cfg = RunConfig::parse("model = sniper\ncommand = prc\nout = " + d + "\n");
        std::string err;
        REQUIRE(run(std::move(cfg), &err) == 0);
    }
    CHECK(read_file(d1 + "/prc.csv") == read_file(d2 + "/prc.csv"));
    CHECK(read_file(d1 + "/orbit.csv") == read_file(d2 + "/orbit.csv"));
}

TEST_CASE("run: reduce-sim impulse jump in the manifest") {
    const std::string dir = temp_dir("reduce_sim");
    {
        std::ofstream f(dir + "/u.csv");
        f << "#impulses\nt,dx1,dx2\n0,0,0.001\n";
    }
    auto cfg = RunConfig::parse("model = hopf\ncommand = reduce-sim\nout = " + dir +
                                "\ncontrol = " + dir + "/u.csv\nt_span = 2\n");
    std::string err;
    REQUIRE(run(std::move(cfg), &err) == 0);
    const std::string manifest = read_file(dir + "/manifest.txt");
    const auto pos = manifest.find("jump1_dtheta = ");
    REQUIRE(pos != std::string::npos);
    const double dtheta = std::stod(manifest.substr(pos + 15));
    CHECK(std::abs(dtheta - 0.001) < 1e-9);
    CHECK(std::filesystem::exists(dir + "/reduced.csv"));
}

TEST_CASE("run: exit codes") {
    auto bad = RunConfig::parse("model = hopf\nfoo = 1\n");
    std::string err;
    CHECK(run(std::move(bad), &err) == 2);
    CHECK(err.find("foo") != std::string::npos);

    RunConfig missing;
    CHECK(run(std::move(missing), &err) == 2);

    auto badcmd = RunConfig::parse("model = hopf\ncommand = sweep\n");
    CHECK(run(std::move(badcmd), &err) == 2);  // sweep needs the vdp model
}

TEST_CASE("run: validate exits 0 on a catalog model") {
    const std::string dir = temp_dir("validate_sniper");
    auto cfg = RunConfig::parse("model = sniper\ncommand = validate\nout = " + dir +
                                "\n");
    std::string err;
    CHECK(run(std::move(cfg), &err) == 0);
    const std::string manifest = read_file(dir + "/manifest.txt");
    CHECK(manifest.find("check.prc_sup = pass") != std::string::npos);
}

TEST_CASE("format_g17 round-trips doubles") {
    for (double v : {1.0 / 3.0, kTwoPi, 2.3e-14, -1.7579}) {
        CHECK(std::stod(format_g17(v)) == v);
    }
}
