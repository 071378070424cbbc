#include <cstring>
#include <iostream>

#include "acceptance.hpp"

// Usage: acceptance [fast|full] [criterion ids...]
int main(int argc, char** argv) {
  using namespace shearstab::acceptance;
  Tier tier = Tier::full;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "fast")) tier = Tier::fast;
    else if (!std::strcmp(argv[i], "full")) tier = Tier::full;
    else only.push_back(std::atoi(argv[i]));
  }
  return run(tier, std::cout, only) == 0 ? 0 : 1;
}
