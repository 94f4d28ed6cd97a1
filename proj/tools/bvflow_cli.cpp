#include <cstdio>

int main() {
  std::puts("bvflow: placeholder build");
  return 2;
}
