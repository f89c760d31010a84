#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct result {
    int code;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("qfb-cli-" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

result run(const std::string& args, const std::string& cache = "cache") {
    const fs::path out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
    const std::string cmd = "QBF_CACHE_DIR='" + (work_dir() / cache).string() + "' '" QFB_CLI_PATH "' " + args +
                            " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("zeros table: ten certified rows", "[cli]") {
    const auto r = run("zeros --q 0.5 --nu 1 --k 1..10 --format csv");
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == std::vector<std::string>{"k", "value", "eps", "alpha", "certified"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stoi(rows[i][0]) == static_cast<int>(i));
        if (rows[i][4] == "true") {
            const double eps = std::stod(rows[i][2]), alpha = std::stod(rows[i][3]);
            CHECK(eps > 0);
            CHECK(eps < alpha);
        }
    }
}

TEST_CASE("invalid q is a usage error", "[cli]") {
    CHECK(run("zeros --q 1.5").code == 1);
    CHECK(run("zeros --q abc").code == 1);
    CHECK(run("zeros --q 0.5 --k 3..1").code == 1);
    CHECK(run("zeros --bogus").code == 1);
    CHECK(run("").code == 1);
    CHECK(run("verify --family nosuch").code == 1);
    CHECK(run("expand --f g-nu-mu --q 0.5 --nu 2").code == 1);
}

TEST_CASE("warm cache reproduces the cold output", "[cli]") {
    const auto cold = run("zeros --q 0.5 --nu 2 --kmax 12 --format json", "fresh");
    REQUIRE(cold.code == 0);
    CHECK(fs::exists(work_dir() / "fresh" / "zeros_q0.500000000000_nu2.000000000000.tsv"));
    const auto warm = run("zeros --q 0.5 --nu 2 --kmax 12 --format json", "fresh");
    const auto uncached = run("zeros --q 0.5 --nu 2 --kmax 12 --format json --no-cache", "unused");
    CHECK(warm.out == cold.out);
    CHECK(uncached.out == cold.out);
    CHECK_FALSE(fs::exists(work_dir() / "unused"));
    const auto flag = run("zeros --q 0.5 --nu 2 --kmax 3 --cache '" + (work_dir() / "flagdir").string() + "'", "env");
    CHECK(flag.code == 0);
    CHECK(fs::exists(work_dir() / "flagdir"));
    CHECK_FALSE(fs::exists(work_dir() / "env"));
}

TEST_CASE("expand x^nu: closed form and numeric columns agree", "[cli]") {
    const auto r = run("expand --f power-nu --q 0.5 --nu 2 --kmax 30 --format json");
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    REQUIRE(doc["coefficients"].size() == 30);
    for (const auto& row : doc["coefficients"]) {
        INFO("k=" << row["k"]);
        const auto& d = row["relative_difference"];
        const double v = d.is_number() ? d.get<double>() : 0.0;  // strings only for values below 1e-308
        CHECK(v < 1e-9);
    }
    CHECK(doc["seed"] == 1);
    CHECK(doc["points"].size() == 33);
}

TEST_CASE("expand the second example", "[cli]") {
    const auto r = run("expand --f g-nu-mu --mu 3 --q 0.5 --nu 2 --kmax 8 --format json");
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    for (const auto& row : doc["coefficients"]) CHECK(row["relative_difference"].get<double>() < 1e-8);
    CHECK(doc["f"] == "g-nu-mu");
}

TEST_CASE("expand from user-supplied samples", "[cli]") {
    const fs::path f = work_dir() / "f.csv";
    {
        std::ofstream out(f);
        out << "n,f\n-1,4\n";
        double v = 1;
        for (int n = 0; n <= 150; ++n, v *= 0.25) out << n << ',' << v << '\n';
        out << "inf,0\n";
    }
    const auto r = run("expand --values '" + f.string() + "' --q 0.5 --nu 2 --kmax 6 --format csv");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# coefficients") != std::string::npos);
    CHECK(r.out.find("# points") != std::string::npos);

    const fs::path bad = work_dir() / "bad.csv";
    std::ofstream(bad) << "n,f\n0,1\n2,x\n";
    CHECK(run("expand --values '" + bad.string() + "' --q 0.5 --nu 2").code == 3);
    CHECK(run("expand --values '" + (work_dir() / "missing.csv").string() + "' --q 0.5 --nu 2").code == 3);
}

TEST_CASE("coeffs and converge commands", "[cli]") {
    const auto c = run("coeffs --q 0.5 --nu 2 --kmax 5");
    REQUIRE(c.code == 0);
    CHECK(csv_rows(c.out).size() == 6);
    const auto v = run("converge --q 0.5 --nu 2 --kmax 20 --ngrid 20 --format json");
    REQUIRE(v.code == 0);
    const auto doc = json::parse(v.out);
    CHECK(doc["partial_sums"].size() == 20);
    CHECK(doc["sup_errors_monotone"] == true);
    CHECK(doc["holder_order"].get<double>() == Catch::Approx(2.0).margin(0.05));
    CHECK_FALSE(doc.contains("warnings"));

    const auto w = run("converge --q 0.5 --nu 0.5 --kmax 10 --ngrid 10");
    CHECK(w.code == 0);
    CHECK(w.err.find("warning") != std::string::npos);
}

TEST_CASE("eval reports values and warns on ill-conditioning", "[cli]") {
    const auto r = run("eval --q 0.5 --nu 1 --x 1.7 --pn 2 --format json");
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["values"][0]["J"].get<double>() == Catch::Approx(0.3726520553255547).epsilon(1e-14));
    CHECK(doc["values"][0].contains("P_n(x^2)"));
    CHECK(r.err.empty());
    const auto near_zero = run("eval --q 0.5 --nu 1 --x 64");
    CHECK(near_zero.code == 0);
    CHECK(near_zero.err.find("condition") != std::string::npos);
}

TEST_CASE("verify: default families pass", "[cli]") {
    const auto r = run("verify");
    CHECK(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["pass"] == true);
    CHECK(doc["seed"] == 1);
    CHECK(doc["families"].size() == 15);
}

TEST_CASE("verify single families", "[cli]") {
    const auto o = json::parse(run("verify --family orthogonality --q 0.5 --nu 1").out);
    REQUIRE(o["families"].size() == 1);
    CHECK(o["families"][0]["max_residual"].get<double>() < 1e-10);
    const auto j = json::parse(run("verify --family jacobi --q 0.5").out);
    CHECK(j["families"][0]["max_residual"].get<double>() < 1e-13);
}

TEST_CASE("verify output is byte-identical across runs and seeds are honoured", "[cli]") {
    const auto a = run("verify --family finite-sums --family qbessel --seed 7");
    const auto b = run("verify --family finite-sums --family qbessel --seed 7");
    CHECK(a.out == b.out);
    CHECK(json::parse(a.out)["seed"] == 7);
}
