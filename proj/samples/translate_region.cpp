// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0

// Drags a small blob three cells to the right and prints the source region,
// the coarse forward estimate and the validated destination as ASCII.

#include <iostream>
#include <vector>

#include "dragkit/lrm.hpp"

namespace {

void print(const char* title, const dragkit::BinaryMask& m) {
  std::cout << title << "\n";
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) std::cout << (m.test(x, y) ? '#' : '.');
    std::cout << "\n";
  }
  std::cout << "\n";
}

}  // namespace

int main() {
  using namespace dragkit;
  BinaryMask src(16, 9);
  for (int y = 3; y <= 5; ++y)
    for (int x = 2; x <= 5; ++x) src.set(x, y);

  const std::vector<DragPair> pairs = {{{4, 4}, {9, 4}}, {{2, 3}, {7, 3}}};
  const LrmResult r = reverse_map(src, pairs);

  print("source", src);
  print("coarse target", r.coarse);
  print("destination", r.mask_dst);
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      if (const auto& c = r.corr(x, y))
        std::cout << "(" << x << "," << y << ") <- (" << c->x << "," << c->y << ")\n";
}
