#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto dir = fs::temp_directory_path() / "esfem_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args, const fs::path& log)
{
    const std::string cmd = std::string("\"") + ESFEM_EVOLVE_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        lines.push_back(line);
    }
    return lines;
}

std::vector<fs::path> files_under(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            out.push_back(fs::relative(e.path(), dir));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("example1 on two levels")
{
    const auto dir = scratch("example1");
    const int code = run("example1 --levels 1..2 --tau 0.01 --out \"" + dir.string() + "\"", dir / "log.txt");
    INFO(slurp(dir / "log.txt"));
    CHECK(code == 0);
    const auto table = lines_of(dir / "table.csv");
    REQUIRE(table.size() == 3);
    CHECK(table[0].rfind("level,dof,h,", 0) == 0);
    CHECK(table[1].rfind("1,42,", 0) == 0);
    CHECK(table[2].rfind("2,162,", 0) == 0);
    CHECK(fs::exists(dir / "table_v_l2.csv"));
    CHECK(slurp(dir / "config.txt").find("tau = 0.01") != std::string::npos);
}

TEST_CASE("verify writes an all-pass report")
{
    const auto dir = scratch("verify");
    const int code = run("verify --out \"" + dir.string() + "\"", dir / "log.txt");
    CHECK(code == 0);
    const auto report = lines_of(dir / "verify.txt");
    REQUIRE(report.size() >= 10);
    for (const auto& line : report) {
        CHECK(line.rfind("CHECK ", 0) == 0);
        CHECK(line.substr(line.size() - 4) == "PASS");
    }
}

TEST_CASE("configuration errors exit with 2")
{
    const auto dir = scratch("config");
    CHECK(run("example1 --solver lu --out \"" + dir.string() + "\"", dir / "a.txt") == 2);
    CHECK(run("example1 --no-such-flag", dir / "b.txt") == 2);
    CHECK(run("", dir / "c.txt") == 2);
    CHECK(run("example1 --config \"" + (dir / "missing.cfg").string() + "\"", dir / "d.txt") == 2);
    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "colour = blue\n";
    }
    CHECK(run("example1 --config \"" + (dir / "bad.cfg").string() + "\"", dir / "e.txt") == 2);
    CHECK(slurp(dir / "e.txt").find("colour") != std::string::npos);
}

TEST_CASE("mesh degeneration exits with 3")
{
    const auto dir = scratch("degenerate");
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "levels = 1..1\ntau = 0.01\nabort_min_angle = 59\n";
    }
    const int code = run("example1 --config \"" + (dir / "run.cfg").string() + "\" --out \"" + dir.string() + "\"",
                         dir / "log.txt");
    INFO(slurp(dir / "log.txt"));
    CHECK(code == 3);
}

TEST_CASE("linear solver failure exits with 4")
{
    const auto dir = scratch("solver");
    const int code =
        run("example1 --levels 1..1 --tau 0.01 --solver cg --cg-tol 1e-30 --out \"" + dir.string() + "\"",
            dir / "log.txt");
    INFO(slurp(dir / "log.txt"));
    CHECK(code == 4);
}

TEST_CASE("tumor reruns are bitwise identical")
{
    const auto a = scratch("tumor_a");
    const auto b = scratch("tumor_b");
    const auto cfg = fs::temp_directory_path() / "esfem_test_cli" / "tumor.cfg";
    {
        std::ofstream f(cfg);
        f << "level = 1\npre_time = 0.05\nT = 0.02\nseed = 7\n";
    }
    const std::string common = "tumor --config \"" + cfg.string() + "\" --export-every 10 --out ";
    REQUIRE(run(common + "\"" + a.string() + "\"", a.parent_path() / "log_a.txt") == 0);
    REQUIRE(run(common + "\"" + b.string() + "\"", b.parent_path() / "log_b.txt") == 0);

    const auto fa = files_under(a);
    CHECK(fa == files_under(b));
    CHECK(std::count_if(fa.begin(), fa.end(), [](const fs::path& p) { return p.extension() == ".vtk"; }) >= 6);
    for (const auto& rel : fa) {
        if (rel == "config.txt") {
            continue; // records the output directory
        }
        INFO(rel.string());
        CHECK(slurp(a / rel) == slurp(b / rel));
    }
    const auto summary = lines_of(a / "tumor_summary.csv");
    REQUIRE(summary.size() == 3);
    CHECK(summary[1].rfind("mcf,", 0) == 0);
    CHECK(summary[2].rfind("elliptic,", 0) == 0);
}
