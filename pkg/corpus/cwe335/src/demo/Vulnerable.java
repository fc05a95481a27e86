package demo;

import javax.crypto.Cipher;
import javax.crypto.SecretKey;
import javax.crypto.spec.IvParameterSpec;
import java.security.SecureRandom;

public class Vulnerable {
    private static final byte[] SEED = "build-42".getBytes();

    public byte[] encrypt(SecretKey key, byte[] plain) throws Exception {
        SecureRandom random = new SecureRandom();
        random.setSeed(SEED);
        byte[] iv = new byte[16];
        random.nextBytes(iv);
        Cipher cipher = Cipher.getInstance("AES/CBC/PKCS5Padding");
        cipher.init(Cipher.ENCRYPT_MODE, key, new IvParameterSpec(iv));
        return cipher.doFinal(plain);
    }
}
