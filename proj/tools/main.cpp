#include "usar/cli.hpp"

int main(int argc, char** argv) {
  return usar::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
