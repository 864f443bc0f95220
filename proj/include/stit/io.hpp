#pragma once

#include <ostream>
#include <string>
#include <string_view>

#include "stit/geometry.hpp"
#include "stit/nesting.hpp"
#include "stit/simulator.hpp"

namespace stit {

// JSON shapes (documented in docs/formats.md):
//   polytope:     {"dim", "vertices": [[x..]..], "facets": [{"normal", "offset", "tag"}..]}
//   tessellation: {"format": "stit-tessellation/1", "window", "cells": [polytope..]}
//   snapshot:     {"format": "stit-snapshot/1", "clock", "zeta", "window", "zero_cell",
//                  "cells": [{"id", "lambda", "polytope"}..], "jumps": [..]}
// Output is deterministic: fixed key order, round-trip double precision.
std::string polytope_json(const Polytope& p);
std::string tessellation_json(const Tessellation& t);
std::string snapshot_json(const TessellationState& state);

// Reads either JSON shape back into a tessellation. 2D only: polygons are
// rebuilt from their counter-clockwise vertex lists. Throws DomainError on
// malformed input.
Tessellation tessellation_from_json(std::string_view text);

struct SvgOptions {
  int size_px = 600;
  double stroke_px = 1.0;
  bool shade_zero_cell = true;
};

// SVG 1.1 drawing of the cell boundaries of a planar tessellation; the
// y axis points up. Throws DomainError unless dim == 2.
void write_svg(std::ostream& out, const Tessellation& t, const SvgOptions& options = {});

// RFC 4180 field: quoted when it contains a comma, quote or line break.
std::string csv_field(std::string_view s);

}  // namespace stit
