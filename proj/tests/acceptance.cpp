// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "lidscope/selftest.hpp"

namespace fs = std::filesystem;
using namespace lidscope;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LIDSCOPE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// `estimate` run with 1 and 8 threads on a 1e4-point cloud must write the
/// same bytes.
selftest::CheckResult cli_determinism() {
    return selftest::detail::timed("CLI determinism", [](std::ostringstream& out) {
        const fs::path dir = fs::temp_directory_path() / ("lidscope-acceptance-" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        const std::string dump = "'" + (dir / "cloud.lide").string() + "'";
        bool ok = run_cli("synth --kind cube -n 10000 -d 5 -D 32 --seed 11 --output " + dump) == 0;
        ok = ok && run_cli("estimate -i " + dump + " --threads 1 -o '" + (dir / "t1").string() + "'") == 0;
        ok = ok && run_cli("estimate -i " + dump + " --threads 8 -o '" + (dir / "t8").string() + "'") == 0;
        if (!ok) {
            out << "CLI run failed";
        } else {
            for (const char* f : {"estimates.csv", "summary.json"}) {
                const bool same = slurp(dir / "t1" / f) == slurp(dir / "t8" / f) && !slurp(dir / "t1" / f).empty();
                out << f << (same ? " identical; " : " differs; ");
                ok = ok && same;
            }
        }
        fs::remove_all(dir);
        return ok;
    });
}

}  // namespace

int main() {
    selftest::Options opts;
    bool all_ok = true;
    auto report = [&](const selftest::CheckResult& r) {
        all_ok = all_ok && r.passed;
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.seconds << " s): " << r.detail
                  << std::endl;
    };
    for (const auto& check : selftest::all_checks()) {
        if (std::string(check.key) == "determinism") {
            // Library and CLI determinism are reported as one criterion.
            const auto lib = check.run(opts);
            const auto cli = cli_determinism();
            report(selftest::CheckResult{"determinism", lib.passed && cli.passed,
                                         "library: " + lib.detail + "; CLI: " + cli.detail,
                                         lib.seconds + cli.seconds});
            continue;
        }
        report(check.run(opts));
    }
    std::cout << (all_ok ? "ALL PASS" : "SOME CHECKS FAILED") << std::endl;
    return all_ok ? 0 : 1;
}
