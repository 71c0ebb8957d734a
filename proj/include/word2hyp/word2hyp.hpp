#pragma once

#include "corpus.hpp"
#include "entailment.hpp"
#include "hyponymy.hpp"
#include "model.hpp"
#include "model_io.hpp"
#include "random.hpp"
#include "semisup.hpp"
#include "taxonomy.hpp"
#include "trainer.hpp"
