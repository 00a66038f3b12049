#include <cstdio>
int main(){ std::puts("hsense"); return 0; }
