// Acceptance suite: one criterion per labeled check, one pass/fail line each.
// Placeholder harness; criteria are filled in alongside the modules.

#include <cstdio>

int main() {
  std::puts("acceptance suite not yet populated");
  return 1;
}
