#include <iostream>

#include "twoiso/harness.hpp"

int main(int argc, char** argv) {
  try {
    const twoiso::RunConfig cfg = twoiso::parse_config(argc, argv);
    return twoiso::run(cfg);
  } catch (const twoiso::HelpRequested& h) {
    std::cout << h.text;
    return 0;
  } catch (const twoiso::Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == twoiso::ErrorCode::UsageError ? 2 : 1;
  }
}
