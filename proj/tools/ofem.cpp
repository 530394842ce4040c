#include <cstdio>

int main() {
  std::puts("ofem: subcommands not wired up yet");
  return 1;
}
