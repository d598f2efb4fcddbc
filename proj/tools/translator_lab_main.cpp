#include <iostream>

int main() {
  std::cout << "translator-lab placeholder\n";
  return 0;
}
