#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "muit/util/log.hpp"

int main(int argc, char** argv) {
  muit::log::init_from_env("off");
  return doctest::Context(argc, argv).run();
}
