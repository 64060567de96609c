#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef DIRACLAB_CLI_PATH
#define DIRACLAB_CLI_PATH "diraclab"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(DIRACLAB_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = (status >= 0 && status % 256 == 0) ? status / 256 : status;
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("diraclab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_spec(const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
}

} // namespace

TEST_CASE("classify prints the fired clause") {
    const fs::path dir = fresh_dir("classify");
    write_spec(dir / "c.json", R"({"kind":"PowerLaw","V0":1,"B0":1,"t":1,"s":3})");
    const RunResult res = run_cli("classify --spec " + (dir / "c.json").string(), dir);
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("regime=DiscreteSpectrum clause=(c):t<s/2") != std::string::npos);
}

TEST_CASE("invalid spec exits 2 with a diagnostic code") {
    const fs::path dir = fresh_dir("badspec");
    write_spec(dir / "bad.json", R"({"kind":"PowerLaw","V0":-1,"B0":1,"t":1,"s":1})");
    const RunResult res = run_cli("classify --spec " + (dir / "bad.json").string(), dir);
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("E_SPEC_V0_NONPOSITIVE") != std::string::npos);
}

TEST_CASE("malformed JSON and unknown flags have distinct diagnostics") {
    const fs::path dir = fresh_dir("badjson");
    write_spec(dir / "x.json", "{not json");
    const RunResult res = run_cli("classify --spec " + (dir / "x.json").string(), dir);
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("E_SPEC_PARSE") != std::string::npos);

    const RunResult res2 = run_cli("classify --nonsense", dir);
    CHECK(res2.exit_code == 2);
    CHECK(res2.err.find("E_CLI_USAGE") != std::string::npos);
}

TEST_CASE("spectrum emits the Landau ladder and reruns are byte-identical") {
    const fs::path dir = fresh_dir("spectrum");
    write_spec(dir / "landau.json", R"({"kind":"PowerLaw","V0":1e-300,"B0":1,"t":0,"s":0})");
    const std::string args = "spectrum --spec " + (dir / "landau.json").string() +
                             " --radius 14 --cells 1400 --sectors -3..3 --window 1,3 --out " +
                             (dir / "runA").string();
    const RunResult res = run_cli(args, dir);
    REQUIRE(res.exit_code == 0);
    const std::string csv = slurp(dir / "runA" / "spectrum.csv");
    CHECK(csv.find("1.41421") != std::string::npos);
    CHECK(csv.find("2.44948") != std::string::npos);
    CHECK(csv.find("# subcommand=spectrum") != std::string::npos);

    const std::string args2 = "spectrum --spec " + (dir / "landau.json").string() +
                              " --radius 14 --cells 1400 --sectors -3..3 --window 1,3 --out " +
                              (dir / "runB").string();
    REQUIRE(run_cli(args2, dir).exit_code == 0);
    CHECK(slurp(dir / "runB" / "spectrum.csv") == csv);
}

TEST_CASE("sweep labels the named points") {
    const fs::path dir = fresh_dir("sweep");
    const RunResult res = run_cli(
        "sweep --points \"1,3;0.6,1;3,1\" --out " + (dir / "out").string(), dir);
    REQUIRE(res.exit_code == 0);
    const std::string csv = slurp(dir / "out" / "sweep.csv");
    CHECK(csv.find("DiscreteSpectrum") != std::string::npos);
    CHECK(csv.find("DensePurePoint") != std::string::npos);
    CHECK(csv.find("AbsolutelyContinuous") != std::string::npos);
}

TEST_CASE("zeromode subcommand writes the identity table") {
    const fs::path dir = fresh_dir("zeromode");
    write_spec(dir / "landau.json", R"({"kind":"PowerLaw","V0":1e-300,"B0":1,"t":0,"s":0})");
    const RunResult res = run_cli("zeromode --spec " + (dir / "landau.json").string() +
                                      " --max-degree 2 --radius 14 --out " + (dir / "out").string(),
                                  dir);
    REQUIRE(res.exit_code == 0);
    const std::string csv = slurp(dir / "out" / "zeromode.csv");
    CHECK(csv.find("m,norm,tail,d_residual,dstar_identity_relerr,thm2_ratio,thm2_bound") !=
          std::string::npos);
}
