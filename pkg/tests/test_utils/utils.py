import random
from os.path import dirname, join, abspath

from ITSBound.its_parser import parse_program
from ITSBound.polynomials import Atom, Constraint, Polynomial
from ITSBound.program import IntegerProgram, Transition

# Base dir of project, contains subdirs "tests" and "ITSBound" and README.md
PROJECT_ROOT = dirname(dirname(dirname(abspath(__file__))))

# Directory with test data, independent of current working directory
DATA_BASE_DIR = join(PROJECT_ROOT, 'tests', 'test_data')

# Example programs in the .koat format
PROGRAMS_DIR = join(DATA_BASE_DIR, 'programs')

# Expected outputs that are compared verbatim
GOLDEN_DIR = join(DATA_BASE_DIR, 'golden')


def load_program(name):
    with open(join(PROGRAMS_DIR, name), 'r') as fp:
        return parse_program(fp.read())


def load_golden(name):
    with open(join(GOLDEN_DIR, name), 'r') as fp:
        return fp.read()


# Random programs for property tests. Same seed, same program.

RANDOM_VARIABLES = ("x", "y")


def random_program(seed, variables=RANDOM_VARIABLES, temporaries=False):
    """An entry l0 -> l1, one or two loops at l1 (at most one of them through l2) and an exit l1 -> l3.

    With `temporaries` the entry sets the first variable to a temporary u with 0 <= u <= last variable.
    """
    rng = random.Random(seed)

    def var(name):
        return Polynomial.variable(name)

    def linear():
        poly = Polynomial.constant(rng.randint(-1, 2))
        for name in variables:
            poly = poly + rng.randint(-1, 1) * var(name)
        return poly

    def update():
        result = {}
        for name in variables:
            choice = rng.randrange(4)
            if choice == 0:
                result[name] = var(name) - rng.randint(1, 2)
            elif choice == 1:
                result[name] = var(name) + var(rng.choice(variables))
            elif choice == 2:
                result[name] = var(name) + rng.randint(0, 1)
        return result

    if temporaries:
        u = var("u")
        entry = Transition.make("t0", "l0", "l1", variables,
                                guard=Constraint.of([Atom.ge(u, 0), Atom.le(u, var(variables[-1]))]),
                                update={variables[0]: u})
    else:
        entry = Transition.make("t0", "l0", "l1", variables)
    transitions = [entry]
    through_l2 = False
    for _ in range(rng.randint(1, 2)):
        counter = rng.choice(variables)
        atoms = [Atom.gt(var(counter), rng.randint(-1, 1))]
        if rng.random() < 0.5:
            atoms.append(Atom.gt(linear(), 0))
        loop_update = update()
        if rng.random() < 0.6:
            loop_update[counter] = var(counter) - rng.randint(1, 2)
        t_id = "t{0}".format(len(transitions))
        if not through_l2 and rng.random() < 0.3:
            through_l2 = True
            transitions.append(Transition.make(t_id, "l1", "l2", variables, guard=Constraint.of(atoms),
                                               update=loop_update))
            transitions.append(Transition.make("t{0}".format(len(transitions)), "l2", "l1", variables))
        else:
            transitions.append(Transition.make(t_id, "l1", "l1", variables, guard=Constraint.of(atoms),
                                               update=loop_update))
    transitions.append(Transition.make("t{0}".format(len(transitions)), "l1", "l3", variables,
                                       guard=Constraint.of([Atom.le(var(variables[0]), 0)])))
    return IntegerProgram.build(variables, "l0", transitions)
