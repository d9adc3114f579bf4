// Acceptance binary: criteria 1-9 through cmd_verify, then criterion 10 by a
// second cmd_verify run compared byte for byte. One line per criterion.
// Usage: acceptance [out_dir] [criteria, e.g. 1,4,9]

#include "tsync/acceptance.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

int main(int argc, char** argv)
{
    const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance_out";
    tsync::AcceptanceOptions options;
    if (argc > 2) {
        std::stringstream ids(argv[2]);
        std::string item;
        while (std::getline(ids, item, ',')) {
            options.only.insert(std::stoi(item));
        }
    }

    std::vector<tsync::CriterionResult> results;
    const int first = tsync::cmd_verify(options, out / "run1", &results);

    options.echo = false;
    const auto start = std::chrono::steady_clock::now();
    (void)tsync::cmd_verify(options, out / "run2");
    const double rerun = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string a = slurp(out / "run1" / "summary.json");
    const std::string b = slurp(out / "run2" / "summary.json");
    const bool identical = !a.empty() && a == b;
    std::printf("criterion 10 %-24s %s  measured=%d target=1 tol=0  (summary.json byte-identical across two runs, %zu bytes; rerun %.1fs)\n",
                "[determinism]", identical ? "PASS" : "FAIL", identical ? 1 : 0, a.size(), rerun);

    const bool ok = first == 0 && identical;
    std::cout << (ok ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << std::endl;
    return ok ? 0 : 1;
}
