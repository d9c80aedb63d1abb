#ifndef POSMODEL_POSMODEL_HPP
#define POSMODEL_POSMODEL_HPP

#include "posmodel/appendix.hpp"
#include "posmodel/enumerate.hpp"
#include "posmodel/error.hpp"
#include "posmodel/evaluate.hpp"
#include "posmodel/formula.hpp"
#include "posmodel/io.hpp"
#include "posmodel/poset.hpp"
#include "posmodel/product.hpp"
#include "posmodel/structure.hpp"
#include "posmodel/system.hpp"
#include "posmodel/verify.hpp"

#endif  // POSMODEL_POSMODEL_HPP
