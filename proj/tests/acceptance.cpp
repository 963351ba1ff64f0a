// Acceptance suite: one pass/fail line per criterion. Filled in alongside the
// experiment implementations.
#include <cstdio>

int main() {
  std::printf("acceptance suite placeholder\n");
  return 1;
}
