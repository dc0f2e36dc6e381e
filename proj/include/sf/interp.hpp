#pragma once

#include "sf/ir.hpp"

namespace sf {

// In-process reference executor for lowered loop nests: every assignment is
// flattened to a small stack program over resolved buffer views, then the
// loop tree is walked serially. Arithmetic runs in double precision and
// stores round through the buffer element type. This is the baseline the
// generated kernels are validated and benchmarked against.
class IrInterpreter {
  public:
    IrInterpreter(const LoopNest& nest, Grid& grid);
    ~IrInterpreter();
    IrInterpreter(const IrInterpreter&) = delete;
    IrInterpreter& operator=(const IrInterpreter&) = delete;

    void run();

  private:
    struct Impl;
    Impl* impl_;
};

void interpret(const LoopNest& nest, Grid& grid);

} // namespace sf
