#include "pinauthor/script/interpreter.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace pinauthor::script;

namespace {

// Runs `source` in a fresh realm and returns the console output joined by '\n'.
std::string run(const std::string& source) {
    Interpreter interp;
    Env* scope = interp.newGlobalScope();
    interp.beginFrame();
    interp.run(interp.parse(source), scope);
    std::string out;
    for (const auto& line : interp.consoleLines()) {
        if (!out.empty()) out += '\n';
        out += line;
    }
    return out;
}

std::string errorOf(const std::string& source) {
    try {
        run(source);
    } catch (const ScriptError& e) {
        return e.name + ": " + e.message;
    } catch (const SyntaxError& e) {
        return std::string("SyntaxError: ") + e.what();
    } catch (const BudgetExceeded& e) {
        return e.kind == BudgetExceeded::Kind::Instructions ? "budget:instructions" : "budget:memory";
    }
    return "no error";
}

} // namespace

TEST(ScriptEngine, Arithmetic) {
    EXPECT_EQ(run("console.log(1 + 2 * 3, 7 % 3, 2 ** 10, -7 % 3, 1 / 0, 0.1 + 0.2)"),
              "7 1 1024 -1 Infinity 0.30000000000000004");
    EXPECT_EQ(run("console.log('a' + 1, '3' * '4', 1 + null, 1 + undefined, true + 1)"), "a1 12 1 NaN 2");
    EXPECT_EQ(run("console.log(5 >> 1, -5 >>> 28, 1 << 31, ~5, 5 & 3, 5 | 3, 5 ^ 3)"), "2 15 -2147483648 -6 1 7 6");
    EXPECT_EQ(run("console.log(2 ** 3 ** 2, (2 ** 3) ** 2, 1e21, 123456789012345680000, 1e-7)"),
              "512 64 1e+21 123456789012345680000 1e-7");
}

TEST(ScriptEngine, Comparison) {
    EXPECT_EQ(run("console.log(1 == '1', 1 === '1', null == undefined, null === undefined, NaN == NaN, 'a' < 'b')"),
              "true false true false false true");
    EXPECT_EQ(run("console.log(typeof 1, typeof 'x', typeof null, typeof undefined, typeof {}, typeof (() => 1), typeof zzz)"),
              "number string object undefined object function undefined");
}

TEST(ScriptEngine, Closures) {
    EXPECT_EQ(run(R"(
        const counter = (function() { let n = 0; return function() { n += 1; return n; }; })();
        counter(); counter();
        console.log(counter());
        const fns = [];
        for (let i = 0; i < 3; i++) fns.push(() => i);
        console.log(fns.map(f => f()).join(','));
        var vfns = [];
        for (var j = 0; j < 3; j++) vfns.push(() => j);
        console.log(vfns.map(f => f()).join(','));
    )"), "3\n0,1,2\n3,3,3");
}

TEST(ScriptEngine, Destructuring) {
    EXPECT_EQ(run(R"(
        const { a, b: { c = 5 } = {}, ...rest } = { a: 1, b: {}, d: 4, e: 5 };
        const [x, , y = 9, ...zs] = [1, 2, undefined, 4, 5];
        console.log(a, c, JSON.stringify(rest), x, y, zs.length);
        let p, q;
        [p, q] = [q, p] = [1, 2];
        console.log(p, q);
        function f({ u, v } = { u: 1, v: 2 }, ...more) { return u + v + more.length; }
        console.log(f(), f({ u: 10, v: 20 }, 1, 2));
    )"), "1 5 {\"d\":4,\"e\":5} 1 9 2\n1 2\n3 32");
}

TEST(ScriptEngine, Classes) {
    EXPECT_EQ(run(R"(
        class Animal {
            static count = 0;
            legs = 4;
            constructor(name) { this.name = name; Animal.count++; }
            speak() { return this.name + ' makes a sound'; }
            static create(n) { return new this(n); }
        }
        class Dog extends Animal {
            constructor(name) { super(name); this.kind = 'dog'; }
            speak() { return super.speak() + ' (woof)'; }
        }
        const d = Dog.create('Rex');
        console.log(d.speak(), d.legs, d instanceof Animal, Animal.count, d.constructor === Dog);
    )"), "Rex makes a sound (woof) 4 true 1 true");
}

TEST(ScriptEngine, Exceptions) {
    EXPECT_EQ(run(R"(
        function f() { throw new RangeError('bad'); }
        try { f(); } catch (e) { console.log(e.name, e.message, e instanceof Error, String(e)); }
        let order = [];
        function g() { try { return 1; } finally { order.push('fin'); } }
        console.log(g(), order.join());
        try { null.x; } catch (e) { console.log(e instanceof TypeError); }
        try { undefinedName; } catch (e) { console.log(e.name); }
    )"), "RangeError bad true RangeError: bad\n1 fin\ntrue\nReferenceError");
    EXPECT_EQ(errorOf("throw new Error('boom')"), "Error: boom");
    EXPECT_EQ(errorOf("const a = 1; a = 2;"), "TypeError: Assignment to constant variable.");
}

TEST(ScriptEngine, ArrayMethods) {
    EXPECT_EQ(run(R"(
        const a = [5, 1, 4, 2, 3];
        console.log(a.slice().sort().join(), a.slice().sort((x, y) => y - x).join());
        console.log(a.filter(x => x % 2).join(), a.reduce((s, x) => s + x, 0), a.indexOf(4), a.includes(7));
        console.log([1, [2, [3, [4]]]].flat(Infinity).join(), Array.from({ length: 3 }, (_, i) => i * i).join());
        const b = [1, 2, 3, 4, 5];
        console.log(b.splice(1, 2, 'x').join(), b.join(), b.at(-1), b.length);
        b.length = 2;
        console.log(b, [].concat([1], 2, [[3]]).length);
    )"), "1,2,3,4,5 5,4,3,2,1\n5,1,3 15 2 false\n1,2,3,4 0,1,4\n2,3 1,x,4,5 5 4\n[ 1, 'x' ] 3");
}

TEST(ScriptEngine, StringMethods) {
    EXPECT_EQ(run(R"(
        const s = '  Hello, World  ';
        console.log(s.trim().toUpperCase(), s.trim().split(', ').length, 'abc'.padStart(5, '-'), 'ab'.repeat(3));
        console.log(`x=${1 + 1}, y=${'z'}`, 'a-b-c'.replaceAll('-', '+'), 'abcdef'.slice(-3, -1), 'abc'.charCodeAt(1));
    )"), "HELLO, WORLD 2 --abc ababab\nx=2, y=z a+b+c de 98");
}

TEST(ScriptEngine, NumberFormatting) {
    EXPECT_EQ(run("console.log((1.005).toFixed(2), (123.456).toFixed(1), (0.000001234).toPrecision(2), (255).toString(16), (1234.5678).toExponential(2))"),
              "1.00 123.5 0.0000012 ff 1.23e+3");
    EXPECT_EQ(run("console.log(parseInt('42px'), parseFloat('3.14abc'), Number(''), Number('0x10'), Number('1e3'), +'abc')"),
              "42 3.14 0 16 1000 NaN");
}

TEST(ScriptEngine, MapSetJson) {
    EXPECT_EQ(run(R"(
        const m = new Map([['a', 1]]);
        m.set('b', 2).set(NaN, 3);
        const s = new Set([1, 2, 2, 3]);
        console.log(m.size, m.get(NaN), s.size, [...s].join(), [...m.keys()].join());
        console.log(JSON.stringify({ a: [1, { b: null }], c: 'q"', d: undefined }));
        console.log(JSON.stringify(JSON.parse('{"x":[1,2,{"y":true}]}')));
        console.log(JSON.stringify({ a: 1, b: [1, 2] }, null, 2));
    )"), "3 3 3 1,2,3 a,b,NaN\n{\"a\":[1,{\"b\":null}],\"c\":\"q\\\"\"}\n{\"x\":[1,2,{\"y\":true}]}\n{\n  \"a\": 1,\n  \"b\": [\n    1,\n    2\n  ]\n}");
}

TEST(ScriptEngine, SpreadAndOptional) {
    EXPECT_EQ(run(R"(
        const o = { a: { b: 1 } };
        console.log(o?.a?.b, o.x?.y, o.x?.y.z, o.f?.(), Math.max(...[1, 5, 3]), { ...o.a, c: 2 }.c);
        console.log(null ?? 'd', 0 ?? 'd', 0 || 'd', 1 && 2);
        let z = null; z ??= 4; z ||= 5; console.log(z);
    )"), "1 undefined undefined undefined 5 2\nd 0 d 2\n4");
}

TEST(ScriptEngine, ControlFlow) {
    EXPECT_EQ(run(R"(
        let out = [];
        for (const k in { a: 1, b: 2 }) out.push(k);
        for (const v of [3, 4]) out.push(v);
        let i = 0;
        while (true) { if (++i > 3) break; if (i === 2) continue; out.push('w' + i); }
        do { out.push('d'); } while (false);
        switch (3) { case 1: out.push('one'); case 3: out.push('three'); case 4: out.push('four'); break; default: out.push('def'); }
        console.log(out.join());
    )"), "a,b,3,4,w1,w3,d,three,four");
}

TEST(ScriptEngine, Hoisting) {
    EXPECT_EQ(run(R"(
        console.log(f(), typeof v);
        function f() { return 'hoisted'; }
        var v = 1;
    )"), "hoisted undefined");
    EXPECT_EQ(errorOf("console.log(x); let x = 1;"), "ReferenceError: Cannot access 'x' before initialization");
}

TEST(ScriptEngine, ThisBinding) {
    EXPECT_EQ(run(R"(
        const o = { n: 2, get() { return this.n; }, arrow() { return [1].map(() => this.n)[0]; } };
        const g = o.get;
        console.log(o.get(), o.arrow(), g.call({ n: 7 }), g.bind({ n: 8 })(), g.apply({ n: 9 }, []));
    )"), "2 2 7 8 9");
}

TEST(ScriptEngine, InfiniteLoopHitsBudget) {
    auto start = std::chrono::steady_clock::now();
    EXPECT_EQ(errorOf("while (true) {}"), "budget:instructions");
    EXPECT_EQ(errorOf("for (;;) { try { } catch (e) {} }"), "budget:instructions");
    EXPECT_EQ(errorOf("function f() { try { while(true){} } catch (e) { return 1; } } f();"), "budget:instructions");
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));
}

TEST(ScriptEngine, HugeAllocationHitsBudget) {
    EXPECT_EQ(errorOf("let a = []; while (true) a.push(new Array(10000).fill(1));"), "budget:memory");
    EXPECT_EQ(errorOf("let s = 'x'; while (true) s = s + s;"), "budget:memory");
    EXPECT_EQ(errorOf("'x'.repeat(1e10)"), "budget:memory");
    EXPECT_EQ(errorOf("new Array(4e9)"), "budget:instructions");
}

TEST(ScriptEngine, DeepRecursionIsCatchable) {
    EXPECT_EQ(run("function r(n) { return r(n + 1); } try { r(0); } catch (e) { console.log(e.name, e.message); }"),
              "RangeError Maximum call stack size exceeded");
}

TEST(ScriptEngine, NoHostEscapes) {
    EXPECT_EQ(run("console.log(typeof require, typeof process, typeof globalThis, typeof eval, typeof Date, typeof setTimeout, typeof fetch)"),
              "undefined undefined undefined undefined undefined undefined undefined");
    EXPECT_EQ(errorOf("Function('return 1')()"), "TypeError: Function constructor is not available");
    EXPECT_EQ(errorOf("(function(){}).constructor('return this')()"), "TypeError: Function constructor is not available");
}

TEST(ScriptEngine, SyntaxErrors) {
    EXPECT_EQ(errorOf("function (").substr(0, 12), "SyntaxError:");
    EXPECT_EQ(errorOf("let = ;").substr(0, 12), "SyntaxError:");
    EXPECT_EQ(errorOf("import x from 'y';").substr(0, 12), "SyntaxError:");
    EXPECT_EQ(errorOf("let s = `unterminated").substr(0, 12), "SyntaxError:");
}

TEST(ScriptEngine, DeepNestingIsRejectedNotCrashing) {
    std::string deep(100000, '(');
    EXPECT_EQ(errorOf(deep + "1" + std::string(100000, ')')).substr(0, 12), "SyntaxError:");
    std::string chain = "let a = 1";
    for (int i = 0; i < 50000; ++i) chain += " + 1";
    std::string msg = errorOf(chain);
    EXPECT_TRUE(msg == "no error" || msg.substr(0, 12) == "SyntaxError:") << msg;
}

TEST(ScriptEngine, HostCallAndLookup) {
    Interpreter interp;
    Env* scope = interp.newGlobalScope();
    interp.beginFrame();
    interp.run(interp.parse("function add(a, b) { return a + b; } const k = 3;"), scope);
    Value args[2] = {Value::number(2), Value::number(5)};
    Value r = interp.call(interp.lookup(scope, "add"), Value(), args);
    EXPECT_EQ(r.asNumber(), 7);
    EXPECT_EQ(interp.lookup(scope, "k").asNumber(), 3);
    EXPECT_TRUE(interp.lookup(scope, "missing").isUndefined());
}

TEST(ScriptEngine, GarbageCollectionReclaims) {
    Interpreter interp;
    Env* scope = interp.newGlobalScope();
    interp.run(interp.parse("function churn() { let t = []; for (let i = 0; i < 20000; i++) t.push({ i }); return t.length; }"), scope);
    Value fn = interp.lookup(scope, "churn");
    for (int i = 0; i < 50; ++i) {
        interp.beginFrame();
        interp.call(fn, Value(), {});
        interp.maybeCollect();
    }
    interp.collectGarbage();
    EXPECT_LT(interp.heap().liveBytes(), 8u << 20);
}
