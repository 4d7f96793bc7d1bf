#include <cstdio>

int main() {
  std::puts("fairassign: command-line interface under construction");
  return 2;
}
