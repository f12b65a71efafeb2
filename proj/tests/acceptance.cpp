// One PASS/FAIL line per acceptance criterion.
#include <lamina/checks.hpp>

#include <cstdio>

int main()
{
    lamina::CheckOptions opt;
    int failed = 0;
    for (int id : lamina::check_group("all")) {
        auto r = lamina::run_check(id, opt);
        std::printf("%s\n", lamina::format_check(r).c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    std::printf("%d of 12 criteria failed\n", failed);
    return failed ? 1 : 0;
}
