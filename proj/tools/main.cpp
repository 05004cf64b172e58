#include <cstdio>

#include "mcal/mcal.hpp"

int main() {
  std::puts("mcal: cli under construction");
  return 0;
}
