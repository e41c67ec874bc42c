#include <iostream>

#include "prodyn/scenegen.hpp"

// Regenerates the scenes/ directory shipped with the repository.
int main(int argc, char** argv) {
  const std::string root = argc > 1 ? argv[1] : "scenes";
  try {
    for (const auto& path : prodyn::scenegen::writeAllScenes(root))
      std::cout << path << "\n";
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  }
  return 0;
}
