#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "permuton/acceptance.hpp"

// Usage: permuton-acceptance [--seed S] [--threads T] [ids...]
int main(int argc, char** argv) {
  permuton::acceptance::Options opts;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      opts.seed = std::stoull(argv[++i]);
    } else if (arg == "--threads" && i + 1 < argc) {
      opts.threads = static_cast<unsigned>(std::stoul(argv[++i]));
    } else {
      ids.push_back(std::stoi(arg));
    }
  }
  const auto results = permuton::acceptance::run_suite(opts, ids, [](const auto& r) {
    std::cout << permuton::acceptance::format_line(r) << std::endl;
  });
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
  return passed == results.size() ? EXIT_SUCCESS : EXIT_FAILURE;
}
