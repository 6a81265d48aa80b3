function _protect<T>(x: T, name: string): T
  { x }
function _protectScope<T>(
  x: T, name: string): bool { true }
function _protectToProve<T>(
  x: T, name: string, scope: seq<bool>): T { x }

method Example(x : nat, y : nat)
  requires _protect(x,"x") + _protect(y,"y") > 0
  ensures _protect(x,"x") + _protect(y,"y") > 0
{
  var x : nat := 1;
  assert {:ipm} _protectToProve(
    _protect(x, "x") + _protect(y, "y") > 0,
    "x + y > 0",
    [_protectScope(x,"x"),
     _protectScope(y,"y")]);
}
