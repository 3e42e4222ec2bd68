#include "sasc/distractors.hpp"

namespace sasc {

const std::vector<std::string>& distractor_pool() {
  static const std::vector<std::string> pool = {
      "the morning light crossed the kitchen floor",
      "a cat slept on the warm windowsill",
      "the train arrived a few minutes late",
      "she folded the laundry before dinner",
      "the old clock in the hallway ticked loudly",
      "we walked along the path near the river",
      "he painted the fence a pale shade of blue",
      "the bakery on the corner opens at seven",
      "a light rain fell through the afternoon",
      "the children built a fort out of blankets",
      "my cousin bought a new pair of boots",
      "the leaves turned orange in early autumn",
      "the bus stop was crowded this morning",
      "a small dog barked at the mail carrier",
      "they planted tulips along the driveway",
      "the candle flickered on the dining table",
      "i found my keys under the sofa cushion",
      "the garden gate creaks when it opens",
      "a flock of birds circled above the field",
      "the soup needed a little more salt",
      "we rearranged the furniture in the living room",
      "the library closes early on sundays",
      "he tied his shoes and stepped outside",
      "the wind rattled the loose window frame",
      "a stack of plates sat beside the sink",
      "the hallway smelled of fresh paint",
      "she hummed a tune while brushing her hair",
      "the bicycle tire was slightly flat",
      "a pile of sweaters waited to be folded",
      "the moon rose slowly over the hills",
      "my grandmother knits scarves every winter",
      "the coffee had gone cold on the desk",
      "they waited on the porch for the rain to stop",
      "the carpet in the study is dark green",
      "a spider spun its web in the doorway",
      "the puzzle was missing three pieces",
      "he whistled as he swept the front steps",
      "the towels were drying on the balcony",
      "a bright kite drifted above the beach",
      "the fridge hummed quietly all night",
      "she put a vase of daisies on the table",
      "the staircase was narrow and steep",
      "we ate pancakes with maple syrup",
      "the streetlights flickered on at dusk",
      "a basket of apples sat by the door",
      "the cushions on the couch were faded",
      "he hung his coat on the hook by the door",
      "the pond froze over during the cold snap",
      "a row of tall pines lined the road",
      "the attic was full of dusty boxes",
  };
  return pool;
}

}  // namespace sasc
