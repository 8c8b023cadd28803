#include <atomic>
#include <stdexcept>

#include "iptvq/kernels/kernels.hpp"

namespace iptvq::kernels {

namespace {

const KernelTable kScalarTable{Isa::kScalar, scalar::exact_run, scalar::mobility_run,
                               scalar::exp_shifted, scalar::max_value};
#if defined(IPTVQ_WITH_AVX2)
const KernelTable kAvx2Table{Isa::kAvx2, avx2::exact_run, avx2::mobility_run, avx2::exp_shifted,
                             avx2::max_value};
#endif

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{best_isa()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(IPTVQ_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa best_isa() { return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

const KernelTable& kernel_table(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("instruction set '" + std::string(isa_name(isa)) +
                                "' is not available on this machine");
  }
#if defined(IPTVQ_WITH_AVX2)
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& active_kernels() { return kernel_table(active_slot().load()); }

Isa active_isa() { return active_slot().load(); }

void set_active_isa(Isa isa) {
  kernel_table(isa);  // validates
  active_slot().store(isa);
}

}  // namespace iptvq::kernels
