from .problem import (Coefficient, Fracture, ProblemSpec, constant, powerlaw, tabulated,
                      sin_exact, sin_exact_grad, sin_source)
from .space import FESpace, build_space
from .assembly import (assemble_area_source, assemble_line_source, assemble_load,
                       assemble_stiffness, assemble_stiffness_full)
from .solve import solve_spd
from .functionals import (Solution, convergence_rate, energy_error, evaluate, gradient_on,
                          h1_seminorm, h1_seminorm_diff, interpolate, prolongate,
                          solve_problem, vertex_gradients)
