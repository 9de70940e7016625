// Regenerates the oracle fixtures file.
#include <fstream>
#include <iostream>

#include "rbk/fixtures.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : rbk::fixtures_path();
  const rbk::Json doc = rbk::generate_fixtures();
  std::ofstream os(path);
  if (!os) {
    std::cerr << "cannot write " << path << '\n';
    return 1;
  }
  os << doc.dump(2) << '\n';
  std::cout << "wrote " << doc.at("fixtures").size() << " fixtures to " << path << '\n';
  return 0;
}
