#pragma once

#include "circhad/error.hpp"
#include "circhad/seqcore.hpp"
#include "circhad/blockform.hpp"
#include "circhad/matchchase.hpp"
#include "circhad/searcher.hpp"
