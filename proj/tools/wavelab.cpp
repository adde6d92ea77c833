#include "wavelab/cli.hpp"

int main(int argc, char** argv) {
  return wavelab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
