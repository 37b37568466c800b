// Prints a kernel family for OPENBLAS_CORETYPE when OpenBLAS fell back to its generic core.
#include <cstdio>
#include <cstring>

extern "C" char* openblas_get_corename(void);

int main() {
  const char* core = openblas_get_corename();
  if (!core || std::strcmp(core, "Prescott") != 0) return 0;
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f")) std::printf("SkylakeX");
  else if (__builtin_cpu_supports("avx2")) std::printf("Haswell");
  return 0;
}
