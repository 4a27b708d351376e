// Continue the radial disk solution up to p = 80 and print what the
// diagnostics see next to the leading-order predictions.

#include <cstdio>

#include "lel/asymptotics.hpp"
#include "lel/spectral.hpp"

int main() {
    using namespace lel;
    const auto run = continue_radial({3, 5, 10, 20, 40, 80}, 1.0);
    std::printf("%6s %12s %12s %12s %10s %10s\n", "p", "v(0)", "pred", "mu", "gap", "energy");
    for (const auto& s : run) {
        const auto d = extract_bubble(s);
        const auto pr = predict_rates(s.ep);
        std::printf("%6g %12.8f %12.8f %12.4e %10.5f %10.4f\n", s.ep.p(), d.v_max, pr.v_max, d.mu,
                    gap_law_ratio(d, s.ep), d.energy_uv);
    }
    const auto pr = linearized_probe(run.back());
    std::printf("smallest singular value %.6f (mode %d), Laplacian %.6f\n", pr.singular_values[0], pr.modes[0],
                pr.laplacian_scale);
}
