#pragma once

// Published relative L2 errors of the synthesized field, rows N = 20..320,
// columns h as listed. The k = 10 cases have no h = 0.16 column.

#include <array>
#include <string>
#include <vector>

namespace reference {

struct ErrorTable {
  std::string surface;
  double k;
  double source_x1;
  double source_x2;
  std::vector<double> h;
  std::array<int, 5> n{20, 40, 80, 160, 320};
  std::vector<std::vector<double>> rel_l2;  // [row N][column h]

  double at(int n_value, double h_value) const {
    for (std::size_t r = 0; r < n.size(); ++r) {
      if (n[r] != n_value) continue;
      for (std::size_t c = 0; c < h.size(); ++c) {
        if (h[c] == h_value) return rel_l2[r][c];
      }
    }
    return -1.0;
  }
};

inline const ErrorTable kSmoothK1{"gamma1", 1.0, -1.0, 0.4, {0.16, 0.08, 0.04, 0.02, 0.01}, {20, 40, 80, 160, 320},
                                  {{1.65e-2, 1.59e-2, 1.59e-2, 1.59e-2, 1.58e-2},
                                   {6.09e-3, 5.70e-3, 5.62e-3, 5.61e-3, 5.60e-3},
                                   {2.68e-3, 2.10e-3, 2.00e-3, 1.99e-3, 1.98e-3},
                                   {1.69e-3, 8.61e-4, 7.27e-4, 7.06e-4, 7.01e-4},
                                   {1.46e-3, 4.84e-4, 2.83e-4, 2.54e-4, 2.49e-4}}};

inline const ErrorTable kSmoothK10{"gamma1", 10.0, 0.5, 0.2, {0.08, 0.04, 0.02, 0.01}, {20, 40, 80, 160, 320},
                                   {{1.99e-1, 5.64e-2, 3.09e-2, 3.03e-2},
                                    {1.99e-1, 5.30e-2, 1.63e-2, 1.11e-2},
                                    {1.99e-1, 5.28e-2, 1.36e-2, 4.93e-3},
                                    {1.99e-1, 5.28e-2, 1.33e-2, 3.54e-3},
                                    {1.99e-1, 5.29e-2, 1.33e-2, 3.36e-3}}};

inline const ErrorTable kPolygonK1{"gamma2", 1.0, -1.0, 0.4, {0.16, 0.08, 0.04, 0.02, 0.01}, {20, 40, 80, 160, 320},
                                   {{1.78e-2, 1.77e-2, 1.77e-2, 1.77e-2, 1.77e-2},
                                    {6.46e-3, 6.30e-3, 6.26e-3, 6.25e-3, 6.25e-3},
                                    {2.55e-3, 2.27e-3, 2.22e-3, 2.21e-3, 2.21e-3},
                                    {1.36e-3, 8.64e-4, 7.96e-4, 7.85e-4, 7.82e-4},
                                    {1.07e-3, 4.10e-4, 2.96e-4, 2.80e-4, 2.77e-4}}};

inline const ErrorTable kPolygonK10{"gamma2", 10.0, 0.5, 0.2, {0.08, 0.04, 0.02, 0.01}, {20, 40, 80, 160, 320},
                                    {{1.22e-1, 3.80e-2, 2.77e-2, 2.79e-2},
                                     {1.22e-1, 3.24e-2, 1.21e-2, 1.00e-2},
                                     {1.22e-1, 3.20e-2, 8.61e-3, 3.94e-3},
                                     {1.22e-1, 3.21e-2, 8.16e-3, 2.32e-3},
                                     {1.23e-1, 3.22e-2, 8.13e-3, 2.08e-3}}};

inline const ErrorTable kStepK1{"gamma3", 1.0, -1.0, 0.4, {0.16, 0.08, 0.04, 0.02, 0.01}, {20, 40, 80, 160, 320},
                                {{1.94e-2, 1.93e-2, 1.92e-2, 1.92e-2, 1.92e-2},
                                 {6.96e-3, 6.84e-3, 6.81e-3, 6.80e-3, 6.80e-3},
                                 {2.61e-3, 2.45e-3, 2.42e-3, 2.40e-3, 2.40e-3},
                                 {1.14e-3, 9.09e-4, 8.63e-4, 8.51e-4, 8.50e-4},
                                 {7.11e-4, 3.80e-4, 3.16e-4, 3.03e-4, 3.01e-4}}};

inline const ErrorTable kStepK10{"gamma3", 10.0, 0.5, 0.2, {0.08, 0.04, 0.02, 0.01}, {20, 40, 80, 160, 320},
                                 {{1.10e-1, 9.77e-2, 1.16e-1, 1.22e-1},
                                  {1.14e-1, 3.81e-2, 4.01e-2, 4.30e-2},
                                  {1.21e-1, 2.94e-2, 1.43e-2, 1.49e-3},
                                  {1.25e-1, 3.07e-2, 8.06e-3, 5.17e-3},
                                  {1.26e-1, 3.17e-2, 7.75e-3, 2.31e-3}}};

}  // namespace reference
